"""Spatial relation predicates over scene-graph boxes.

Nine binary relations and two ternary (hyper) relations, all computed from
box centroids and extents in the normalized workspace frame. Left/right
separate along x, behind/front along y with an x-footprint overlap guard,
closer/further along y alone, bigger/smaller compare volumes against a
threshold, and next compares centroid distance against a radius.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateTriple, InvalidObjectId, SelfRelation
from .scene import Box3, SceneGraph

RELATIONS = ("left", "right", "behind", "front", "closer", "further", "bigger", "smaller", "next")
HYPER_RELATIONS = ("closer_than", "further_than")

# relations with a placement direction on the table plane: axis, sign
DIRECTIONAL: dict[str, tuple[int, int]] = {
    "left": (0, -1),
    "right": (0, +1),
    "behind": (1, +1),
    "further": (1, +1),
    "front": (1, -1),
    "closer": (1, -1),
    "next": (0, +1),
}


@dataclass(frozen=True)
class RelationThresholds:
    """Tunable slacks for the size and proximity predicates.

    size_mode "absolute" compares raw volume difference against size_thr;
    "ratio" scales the threshold by the larger volume of the pair, which is
    the sensible default when desk objects differ by orders of magnitude.
    """

    size_thr: float = 0.45
    next_thr: float = 0.25
    size_mode: str = "absolute"
    size_ratio: float = 0.3


DEFAULT_THRESHOLDS = RelationThresholds()

# volume-based predicates at desk scale are useless with the absolute
# threshold (normalized volumes are ~1e-4), so generated datasets use ratio
# mode; the absolute default remains available for callers that want it
DATAGEN_THRESHOLDS = RelationThresholds(size_mode="ratio")


def _boxes(scene: SceneGraph, n: int, m: int) -> tuple[Box3, Box3]:
    if n == m:
        raise SelfRelation(n)
    return scene.object(n).box, scene.object(m).box


def _centroid_dist(a: Box3, b: Box3) -> float:
    return math.dist(a.center, b.center)


def _size_gap(a: Box3, b: Box3, thr: RelationThresholds) -> float:
    if thr.size_mode == "ratio":
        return thr.size_ratio * max(a.volume(), b.volume())
    return thr.size_thr


def zeta_boxes(relation: str, a: Box3, b: Box3, thr: RelationThresholds = DEFAULT_THRESHOLDS) -> bool:
    """Binary predicate on raw boxes; `a` plays the subject role."""
    ax, ay = a.center[0], a.center[1]
    bx, by = b.center[0], b.center[1]
    alx, aly = a.extents[0], a.extents[1]
    blx, bly = b.extents[0], b.extents[1]
    if relation == "left":
        return ax + alx / 2 < bx - blx / 2
    if relation == "right":
        return ax - alx / 2 > bx + blx / 2
    if relation == "behind":
        return abs(ax - bx) < (alx + blx) / 2 and ay - by > (aly + bly) / 2
    if relation == "front":
        return abs(ax - bx) < (alx + blx) / 2 and ay - by < -(aly + bly) / 2
    if relation == "closer":
        return ay + aly / 2 < by - bly / 2
    if relation == "further":
        return ay - aly / 2 > by + bly / 2
    if relation == "bigger":
        return a.volume() > b.volume() + _size_gap(a, b, thr)
    if relation == "smaller":
        return a.volume() < b.volume() - _size_gap(a, b, thr)
    if relation == "next":
        return _centroid_dist(a, b) <= thr.next_thr
    raise ValueError(f"unknown relation {relation!r}")


def zeta(scene: SceneGraph, relation: str, n: int, m: int,
         thr: RelationThresholds = DEFAULT_THRESHOLDS) -> bool:
    """True when object n stands in `relation` to object m."""
    a, b = _boxes(scene, n, m)
    return zeta_boxes(relation, a, b, thr)


def hyper_zeta(scene: SceneGraph, relation: str, n: int, m: int, k: int) -> bool:
    """Ternary predicate: is n closer to (or further from) m than to k."""
    if len({n, m, k}) != 3:
        raise DegenerateTriple((n, m, k))
    pn = scene.object(n).box.center
    pm = scene.object(m).box.center
    pk = scene.object(k).box.center
    # Unsquared comparison: math.dist is scaling-protected, while squaring
    # underflows below ~1e-154 and collapses distinct distances into a tie.
    gap = math.dist(pn, pm) - math.dist(pn, pk)
    if relation == "closer_than":
        return gap < 0
    if relation == "further_than":
        return gap > 0
    raise ValueError(f"unknown hyper relation {relation!r}")


def edge_features(scene: SceneGraph, n: int, m: int,
                  thr: RelationThresholds = DEFAULT_THRESHOLDS) -> list[float]:
    """Pair feature vector: both boxes (6 reals each) then the nine
    relation bits in RELATIONS order; length 21."""
    a, b = _boxes(scene, n, m)
    feats = list(a.center) + list(a.extents) + list(b.center) + list(b.extents)
    feats.extend(1.0 if zeta_boxes(r, a, b, thr) else 0.0 for r in RELATIONS)
    return feats


def location_score(scene: SceneGraph, relation: str, n: int, candidates,
                   thr: RelationThresholds = DEFAULT_THRESHOLDS) -> int:
    """How many members of `candidates` object n dominates under `relation`.

    The object maximizing this score over a candidate set is e.g. the
    leftmost (relation "left") or biggest (relation "bigger") of the set.
    """
    cands = set(candidates)
    if n not in cands:
        raise InvalidObjectId(n, len(scene.objects))
    if not cands:
        raise ValueError("candidate set must be non-empty")
    return sum(1 for m in cands if m != n and zeta(scene, relation, n, m, thr))
