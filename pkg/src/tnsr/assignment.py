"""Maximum linear sum assignment with masking and deterministic ties.

Rows are program steps waiting for a concept argument, columns are tagged
spans; a None entry means the pairing is inadmissible. Every row must be
assigned to a distinct admissible column; the solver maximizes the total
score and breaks ties by preferring the lexicographically smallest
(row, column) pairing. Raises Infeasible naming the starved rows when no
complete matching exists.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import Infeasible

_INF = float("inf")
_REL_TOL = 1e-9


@dataclass(frozen=True)
class Assignment:
    pairs: tuple[tuple[int, int], ...]  # (row, column), sorted by row
    total: float


def hungarian(matrix) -> Assignment:
    """Solve the masked maximum assignment problem for rows <= columns."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    if rows == 0:
        return Assignment((), 0.0)
    if any(len(r) != cols for r in matrix):
        raise ValueError("matrix rows must have equal length")

    adj = [[c for c in range(cols) if matrix[r][c] is not None] for r in range(rows)]
    matched = _max_bipartite(adj, rows, cols)
    starved = [r for r in range(rows) if matched[r] < 0]
    if starved or rows > cols:
        if not starved:
            starved = list(range(cols, rows))
        raise Infeasible(starved)

    best = _solve_max(matrix, list(range(rows)), list(range(cols)))

    # lexicographic refinement: fix each row to the smallest admissible
    # column that still permits an optimal completion
    free_cols = list(range(cols))
    pairs: list[tuple[int, int]] = []
    fixed_total = 0.0
    for r in range(rows):
        rest_rows = list(range(r + 1, rows))
        chosen = None
        for c in free_cols:
            if matrix[r][c] is None:
                continue
            try:
                rest = _solve_max(matrix, rest_rows, [x for x in free_cols if x != c])
            except Infeasible:
                continue
            total = fixed_total + matrix[r][c] + rest
            if total >= best - _REL_TOL * max(1.0, abs(best)):
                chosen = c
                break
        if chosen is None:
            raise Infeasible([r])
        pairs.append((r, chosen))
        fixed_total += matrix[r][chosen]
        free_cols.remove(chosen)
    return Assignment(tuple(pairs), fixed_total)


def _max_bipartite(adj, rows: int, cols: int) -> list[int]:
    """Kuhn's augmenting-path maximum matching; returns row -> column."""
    match_col = [-1] * cols
    match_row = [-1] * rows

    def try_row(r: int, visited: list[bool]) -> bool:
        for c in adj[r]:
            if visited[c]:
                continue
            visited[c] = True
            if match_col[c] < 0 or try_row(match_col[c], visited):
                match_col[c] = r
                match_row[r] = c
                return True
        return False

    for r in range(rows):
        try_row(r, [False] * cols)
    return match_row


def _solve_max(matrix, row_ids, col_ids) -> float:
    """Optimal total for the sub-problem on the given rows and columns."""
    if not row_ids:
        return 0.0
    if len(row_ids) > len(col_ids):
        raise Infeasible(row_ids[len(col_ids):])
    cost = [[_INF if matrix[r][c] is None else -float(matrix[r][c]) for c in col_ids]
            for r in row_ids]
    result = _min_assignment(cost, len(row_ids), len(col_ids))
    if result is None:
        raise Infeasible(row_ids)
    return -result


def _min_assignment(cost, n_rows: int, n_cols: int) -> float | None:
    """Classic potentials + shortest augmenting path, O(n^2 m)."""
    u = [0.0] * (n_rows + 1)
    v = [0.0] * (n_cols + 1)
    p = [0] * (n_cols + 1)
    way = [0] * (n_cols + 1)
    for i in range(1, n_rows + 1):
        p[0] = i
        j0 = 0
        minv = [_INF] * (n_cols + 1)
        used = [False] * (n_cols + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = _INF
            j1 = -1
            for j in range(1, n_cols + 1):
                if used[j]:
                    continue
                entry = cost[i0 - 1][j - 1]
                cur = entry - u[i0] - v[j] if entry < _INF else _INF
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            if delta == _INF:
                return None
            for j in range(n_cols + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    total = 0.0
    for j in range(1, n_cols + 1):
        if p[j]:
            entry = cost[p[j] - 1][j - 1]
            if entry == _INF:
                return None
            total += entry
    return total
