"""Scene-graph model and constrained random scene synthesis.

Coordinates are normalized to [0, 1] per axis over the workspace box.
x grows to the right, y grows away from the robot (which sits at the
bottom middle of the table), z grows upward. Objects rest on the table,
so a box's z center is always half its z extent.

All real fields are quantized to 9 significant digits at construction so
that serialization round trips are exact.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any

from .concepts import ConceptMemory, load_memory
from .errors import SamplingExhausted, SchemaError
from .rng import substream

SPLIT_TAGS = ("scattered", "crowded")

# default workspace dimensions in meters (width, depth, height)
DEFAULT_WORKSPACE = (1.0, 0.8, 0.4)

SCATTERED_MIN_DIST = 0.18   # min pairwise centroid distance, normalized units
CROWDED_CLEARANCE = 0.02    # min axis gap between footprints, normalized units
EDGE_PAD = 0.01             # keep boxes strictly inside the workspace

_EPS = 1e-6                 # conservative margin absorbed by quantization
_PER_OBJECT_TRIES = 150
SIZE_JITTER = 0.15


def q9(x: float) -> float:
    """Quantize to 9 significant digits (the serialization precision)."""
    return float(f"{float(x):.9g}")


@dataclass(frozen=True)
class Workspace:
    w: float = DEFAULT_WORKSPACE[0]
    d: float = DEFAULT_WORKSPACE[1]
    h: float = DEFAULT_WORKSPACE[2]


@dataclass(frozen=True)
class Box3:
    """Axis-aligned box: center (x, y, z) and full extents (lx, ly, lz)."""

    center: tuple[float, float, float]
    extents: tuple[float, float, float]

    def interval(self, axis: int) -> tuple[float, float]:
        c, e = self.center[axis], self.extents[axis]
        return (c - e / 2.0, c + e / 2.0)

    def footprint(self) -> tuple[float, float, float, float]:
        (x0, x1), (y0, y1) = self.interval(0), self.interval(1)
        return (x0, y0, x1, y1)

    def volume(self) -> float:
        lx, ly, lz = self.extents
        return lx * ly * lz

    def contains_xy(self, u: float, v: float) -> bool:
        (x0, x1), (y0, y1) = self.interval(0), self.interval(1)
        return x0 <= u <= x1 and y0 <= v <= y1


def make_box(center, extents) -> Box3:
    return Box3(tuple(q9(c) for c in center), tuple(q9(e) for e in extents))


@dataclass(frozen=True)
class GraspPose:
    """Top-down grasp: footprint point (u, v), wrist angle phi in
    [-pi/2, pi/2), opening width omega, and quality score q."""

    u: float
    v: float
    phi: float
    omega: float
    q: float


def synthesize_grasp(box: Box3) -> GraspPose:
    """Canonical top-down grasp for a box.

    Grasp point is the footprint center; the wrist aligns with the shorter
    horizontal axis (0 when lx <= ly, else pi/2 wrapped to -pi/2); the
    opening matches the shorter extent.
    """
    lx, ly = box.extents[0], box.extents[1]
    phi = 0.0 if lx <= ly else -math.pi / 2.0
    return GraspPose(
        u=q9(box.center[0]),
        v=q9(box.center[1]),
        phi=q9(phi),
        omega=q9(min(lx, ly)),
        q=1.0,
    )


@dataclass(frozen=True)
class ObjectNode:
    id: int
    category: str
    color: str
    material: str
    supercategory: str
    box: Box3
    grasp: GraspPose
    instance_name: str | None = None

    def label(self, attr_type: str) -> str | None:
        if attr_type == "instance":
            return self.instance_name
        return getattr(self, attr_type)


@dataclass(frozen=True)
class SceneGraph:
    objects: tuple[ObjectNode, ...]
    workspace: Workspace = Workspace()
    seed: int = 0
    split_tag: str = "scattered"

    def __len__(self) -> int:
        return len(self.objects)

    def ids(self) -> tuple[int, ...]:
        return tuple(o.id for o in self.objects)

    def object(self, object_id: int) -> ObjectNode:
        from .errors import InvalidObjectId

        if not isinstance(object_id, int) or not 0 <= object_id < len(self.objects):
            raise InvalidObjectId(object_id, len(self.objects))
        return self.objects[object_id]


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SamplerConfig:
    n_range: tuple[int, int] = (5, 8)
    split: str = "scattered"
    categories: tuple[str, ...] | None = None  # catalogue subset; None = all
    require_distractor: bool = False
    min_dist: float = SCATTERED_MIN_DIST
    clearance: float = CROWDED_CLEARANCE
    max_attempts: int = 100  # whole-scene restarts
    workspace: Workspace = Workspace()


def _xy_dist(a: Box3, b: Box3) -> float:
    dx = a.center[0] - b.center[0]
    dy = a.center[1] - b.center[1]
    return math.hypot(dx, dy)


def _footprints_clear(a: Box3, b: Box3, gap: float) -> bool:
    """True when the xy footprints are separated by at least gap on x or y."""
    for axis in (0, 1):
        lo_a, hi_a = a.interval(axis)
        lo_b, hi_b = b.interval(axis)
        if hi_a + gap <= lo_b or hi_b + gap <= lo_a:
            return True
    return False


def _placement_ok(box: Box3, placed: list[Box3], cfg: SamplerConfig) -> bool:
    for other in placed:
        if not _footprints_clear(box, other, cfg.clearance + _EPS):
            return False
        if cfg.split == "scattered" and _xy_dist(box, other) < cfg.min_dist + _EPS:
            return False
    return True


def _has_shared_attribute(labels: list[dict]) -> bool:
    for attr in ("category", "color", "material"):
        seen: set[str] = set()
        for lab in labels:
            if lab[attr] in seen:
                return True
            seen.add(lab[attr])
    return False


def sample_scene(config: SamplerConfig, seed: int, memory: ConceptMemory | None = None) -> SceneGraph:
    """Rejection-sample a non-overlapping tabletop scene.

    Raises SamplingExhausted when config.max_attempts whole-scene restarts
    fail to satisfy the placement constraints.
    """
    if config.split not in SPLIT_TAGS:
        raise ValueError(f"split must be one of {SPLIT_TAGS}, got {config.split!r}")
    memory = memory or load_memory()
    categories = tuple(config.categories or sorted(memory.objects))
    for cat in categories:
        if cat not in memory.objects:
            raise SchemaError(f"categories[{cat}]", "not in catalogue")
    rng = substream(seed, 0)
    ws = config.workspace
    lo, hi = config.n_range

    for _ in range(config.max_attempts):
        n = int(rng.integers(lo, hi + 1))
        labels = []
        for _ in range(n):
            spec = memory.objects[str(rng.choice(categories))]
            labels.append({
                "category": spec.category,
                "color": str(rng.choice(spec.colors)),
                "material": str(rng.choice(spec.materials)),
                "supercategory": spec.supercategory,
                "instance": str(rng.choice(spec.instances)) if spec.instances else None,
            })
        if config.require_distractor and not _has_shared_attribute(labels):
            if not _force_distractor(labels, memory, rng):
                continue

        boxes: list[Box3] = []
        ok = True
        for lab in labels:
            spec = memory.objects[lab["category"]]
            ext = _sample_extents(spec.size, ws, rng)
            box = _place(ext, boxes, config, rng)
            if box is None:
                ok = False
                break
            boxes.append(box)
        if not ok:
            continue

        objects = tuple(
            ObjectNode(
                id=i,
                category=lab["category"],
                color=lab["color"],
                material=lab["material"],
                supercategory=lab["supercategory"],
                instance_name=lab["instance"],
                box=box,
                grasp=synthesize_grasp(box),
            )
            for i, (lab, box) in enumerate(zip(labels, boxes))
        )
        return SceneGraph(objects=objects, workspace=ws, seed=seed, split_tag=config.split)

    raise SamplingExhausted(config.max_attempts)


def _force_distractor(labels: list[dict], memory: ConceptMemory, rng) -> bool:
    """Make two objects share a color or material when none share anything."""
    order = rng.permutation(len(labels))
    for i in order:
        for j in order:
            if i == j:
                continue
            a, b = labels[int(i)], labels[int(j)]
            spec_b = memory.objects[b["category"]]
            if a["color"] in spec_b.colors:
                b["color"] = a["color"]
                return True
            if a["material"] in spec_b.materials:
                b["material"] = a["material"]
                return True
    return False


def _sample_extents(size_m: tuple[float, float, float], ws: Workspace, rng) -> tuple[float, float, float]:
    dims = (ws.w, ws.d, ws.h)
    jit = 1.0 + SIZE_JITTER * (2.0 * rng.random() - 1.0)
    return tuple(q9(s * jit / d) for s, d in zip(size_m, dims))


def _place(ext: tuple[float, float, float], placed: list[Box3], cfg: SamplerConfig, rng) -> Box3 | None:
    lx, ly, lz = ext
    lo_x, hi_x = lx / 2 + EDGE_PAD, 1.0 - lx / 2 - EDGE_PAD
    lo_y, hi_y = ly / 2 + EDGE_PAD, 1.0 - ly / 2 - EDGE_PAD
    if lo_x >= hi_x or lo_y >= hi_y:
        return None
    for _ in range(_PER_OBJECT_TRIES):
        x = lo_x + (hi_x - lo_x) * rng.random()
        y = lo_y + (hi_y - lo_y) * rng.random()
        box = make_box((x, y, lz / 2.0), ext)
        if _placement_ok(box, placed, cfg):
            return box
    return None


# ---------------------------------------------------------------------------
# serialization (canonical, 9 significant digits, stable key order)


def scene_to_dict(scene: SceneGraph) -> dict:
    doc: dict[str, Any] = {
        "seed": scene.seed,
        "split_tag": scene.split_tag,
        "workspace": {"w": q9(scene.workspace.w), "d": q9(scene.workspace.d), "h": q9(scene.workspace.h)},
        "objects": [],
    }
    for o in scene.objects:
        rec: dict[str, Any] = {
            "id": o.id,
            "category": o.category,
            "color": o.color,
            "material": o.material,
            "supercategory": o.supercategory,
        }
        if o.instance_name is not None:
            rec["instance_name"] = o.instance_name
        rec["box"] = {"center": [q9(c) for c in o.box.center], "extents": [q9(e) for e in o.box.extents]}
        rec["grasp"] = {"u": q9(o.grasp.u), "v": q9(o.grasp.v), "phi": q9(o.grasp.phi),
                        "omega": q9(o.grasp.omega), "q": q9(o.grasp.q)}
        doc["objects"].append(rec)
    return doc


def serialize_scene(scene: SceneGraph) -> str:
    return json.dumps(scene_to_dict(scene), separators=(",", ":")) + "\n"


def _need(doc: dict, key: str, kind, path: str):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{path}.{key}" if path else key, "missing field")
    val = doc[key]
    if kind is float:
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise SchemaError(f"{path}.{key}" if path else key, "expected a number")
        return float(val)
    if not isinstance(val, kind) or (kind is int and isinstance(val, bool)):
        raise SchemaError(f"{path}.{key}" if path else key, f"expected {kind.__name__}")
    return val


def parse_scene(text: str, memory: ConceptMemory | None = None) -> SceneGraph:
    """Parse and validate a scene document; raises SchemaError with a path."""
    memory = memory or load_memory()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e.msg}") from None
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected an object")
    seed = _need(doc, "seed", int, "")
    split = _need(doc, "split_tag", str, "")
    if split not in SPLIT_TAGS:
        raise SchemaError("split_tag", f"must be one of {SPLIT_TAGS}")
    ws_doc = _need(doc, "workspace", dict, "")
    ws = Workspace(_need(ws_doc, "w", float, "workspace"),
                   _need(ws_doc, "d", float, "workspace"),
                   _need(ws_doc, "h", float, "workspace"))
    objs_doc = _need(doc, "objects", list, "")
    objects: list[ObjectNode] = []
    for i, rec in enumerate(objs_doc):
        path = f"objects[{i}]"
        if not isinstance(rec, dict):
            raise SchemaError(path, "expected an object")
        oid = _need(rec, "id", int, path)
        if oid != i:
            raise SchemaError(f"{path}.id", f"ids must be contiguous from 0, got {oid}")
        cat = _need(rec, "category", str, path)
        col = _need(rec, "color", str, path)
        mat = _need(rec, "material", str, path)
        sup = _need(rec, "supercategory", str, path)
        for kind, val, fld in (("category", cat, "category"), ("color", col, "color"),
                               ("material", mat, "material"), ("supercategory", sup, "supercategory")):
            if val not in memory.values[kind]:
                raise SchemaError(f"{path}.{fld}", f"unknown {kind} {val!r}")
        inst = rec.get("instance_name")
        if inst is not None and not isinstance(inst, str):
            raise SchemaError(f"{path}.instance_name", "expected str")
        box_doc = _need(rec, "box", dict, path)
        center = _need(box_doc, "center", list, f"{path}.box")
        extents = _need(box_doc, "extents", list, f"{path}.box")
        if len(center) != 3 or len(extents) != 3:
            raise SchemaError(f"{path}.box", "center and extents must have 3 components")
        box = make_box([float(c) for c in center], [float(e) for e in extents])
        for axis in range(3):
            if box.extents[axis] <= 0:
                raise SchemaError(f"{path}.box.extents[{axis}]", "must be positive")
            lo, hi = box.interval(axis)
            if lo < -1e-9 or hi > 1.0 + 1e-9:
                raise SchemaError(f"{path}.box", f"axis {axis} leaves the workspace")
        g_doc = _need(rec, "grasp", dict, path)
        grasp = GraspPose(u=q9(_need(g_doc, "u", float, f"{path}.grasp")),
                          v=q9(_need(g_doc, "v", float, f"{path}.grasp")),
                          phi=q9(_need(g_doc, "phi", float, f"{path}.grasp")),
                          omega=q9(_need(g_doc, "omega", float, f"{path}.grasp")),
                          q=q9(_need(g_doc, "q", float, f"{path}.grasp")))
        # tolerance covers the 9-significant-digit quantization step at |pi/2|
        if not -math.pi / 2 - 1e-8 <= grasp.phi < math.pi / 2:
            raise SchemaError(f"{path}.grasp.phi", "must lie in [-pi/2, pi/2)")
        if grasp.omega <= 0:
            raise SchemaError(f"{path}.grasp.omega", "must be positive")
        if not box.contains_xy(grasp.u, grasp.v):
            raise SchemaError(f"{path}.grasp", "grasp point outside the box footprint")
        objects.append(ObjectNode(id=oid, category=cat, color=col, material=mat,
                                  supercategory=sup, instance_name=inst, box=box, grasp=grasp))
    return SceneGraph(objects=tuple(objects), workspace=ws, seed=seed, split_tag=split)


def displace(obj: ObjectNode, **changes) -> ObjectNode:
    """Convenience for tests and fault harnesses."""
    return replace(obj, **changes)


def displace_object(scene: SceneGraph, object_id: int, delta) -> SceneGraph:
    """Rigidly move one object (box and grasp pose) by (dx, dy, dz)."""
    obj = scene.object(object_id)
    dx, dy, dz = delta
    cx, cy, cz = obj.box.center
    box = make_box((cx + dx, cy + dy, cz + dz), obj.box.extents)
    grasp = GraspPose(u=q9(obj.grasp.u + dx), v=q9(obj.grasp.v + dy),
                      phi=obj.grasp.phi, omega=obj.grasp.omega, q=obj.grasp.q)
    objects = list(scene.objects)
    objects[object_id] = replace(obj, box=box, grasp=grasp)
    return replace(scene, objects=tuple(objects))
