"""Deterministic element placement on the 5x5 panel grid.

Strategy: a canonical greedy pass (seed at center, chase adjacency
partners, fall back to the nearest free cell to center).  For scenes of
five or fewer elements the greedy result is checked against an exact
search over the center 3x3 window; when greedy leaves satisfiable pairs
unsatisfied, the exact placement is used instead.  Any set of adjacency
pairs that can be satisfied at all on a grid by five cells can be
satisfied inside a 3x3 window (the satisfied subgraph re-embeds), so the
window search loses nothing while staying tiny.

Row 0 is the top row, column 0 the left column.  No randomness anywhere;
identical inputs give identical placements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .models import Cell, ElementKind, SceneElement

GRID = 5
CENTER: Cell = (2, 2)
EXACT_LIMIT = 5

_KIND_RANK = {ElementKind.ACTOR: 0, ElementKind.OBJECT: 1, ElementKind.CONCEPT: 2}

# All cells ordered by distance to center, then row-major.
_CELLS_BY_CENTER: list[Cell] = sorted(
    ((r, c) for r in range(GRID) for c in range(GRID)),
    key=lambda cell: (abs(cell[0] - CENTER[0]) + abs(cell[1] - CENTER[1]), cell),
)
_WINDOW_CELLS: list[Cell] = [
    cell for cell in _CELLS_BY_CENTER if 1 <= cell[0] <= 3 and 1 <= cell[1] <= 3
]


def manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def neighbors4(cell: Cell) -> list[Cell]:
    row, col = cell
    out = []
    for r, c in ((row - 1, col), (row, col - 1), (row, col + 1), (row + 1, col)):
        if 0 <= r < GRID and 0 <= c < GRID:
            out.append((r, c))
    return out


def canonical_order(elements: list[SceneElement]) -> list[SceneElement]:
    """Actors, then objects, then concepts; alphabetical by id within kind."""
    return sorted(elements, key=lambda el: (_KIND_RANK[el.kind], el.id))


@dataclass
class PlacementResult:
    placements: dict[str, Cell]
    unsatisfied: list[tuple[str, str]] = field(default_factory=list)
    dropped_pairs: list[tuple[str, str]] = field(default_factory=list)


def _normalize_pairs(
    ids: set[str], adjacencies: list[tuple[str, str]]
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    valid: list[tuple[str, str]] = []
    dropped: list[tuple[str, str]] = []
    seen = set()
    for a, b in adjacencies:
        pair = (a, b) if a <= b else (b, a)
        if a == b or a not in ids or b not in ids:
            dropped.append(pair)
            continue
        if pair in seen:
            continue
        seen.add(pair)
        valid.append(pair)
    return valid, dropped


def _greedy(order: list[str], adjacency: dict[str, set[str]]) -> dict[str, Cell]:
    placed: dict[str, Cell] = {}
    free = set(_CELLS_BY_CENTER)
    for eid in order:
        cell: Cell | None = None
        partner_cells = sorted(
            neighbor
            for partner in adjacency.get(eid, ())
            if partner in placed
            for neighbor in neighbors4(placed[partner])
            if neighbor in free
        )
        if partner_cells:
            cell = partner_cells[0]
        else:
            cell = min(free, key=lambda c: (manhattan(c, CENTER), c))
        placed[eid] = cell
        free.remove(cell)
    return placed


def _satisfied_count(placements: dict[str, Cell], pairs: list[tuple[str, str]]) -> int:
    return sum(1 for a, b in pairs if manhattan(placements[a], placements[b]) == 1)


def _exact_best(order: list[str], pairs: list[tuple[str, str]]) -> dict[str, Cell]:
    """Branch-and-bound over the center window; returns a max-satisfaction
    placement, deterministic for fixed inputs."""
    n = len(order)
    index = {eid: i for i, eid in enumerate(order)}
    ipairs = [(index[a], index[b]) for a, b in pairs]
    earlier = [[] for _ in range(n)]
    for a, b in ipairs:
        lo, hi = min(a, b), max(a, b)
        earlier[hi].append(lo)
    # rem[i] = pairs with an endpoint at position i or later (upper bound
    # on what placing elements i.. can still add).
    rem = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        rem[i] = rem[i + 1] + sum(1 for a, b in ipairs if max(a, b) == i)

    best_val = -1
    best: list[Cell] = []
    cells: list[Cell] = [(0, 0)] * n

    def dfs(i: int, used: set[Cell], satisfied: int) -> None:
        nonlocal best_val, best
        if satisfied + rem[i] <= best_val:
            return
        if i == n:
            best_val = satisfied
            best = cells[:n]
            return
        for cell in _WINDOW_CELLS:
            if cell in used:
                continue
            gained = sum(1 for j in earlier[i] if manhattan(cell, cells[j]) == 1)
            cells[i] = cell
            used.add(cell)
            dfs(i + 1, used, satisfied + gained)
            used.remove(cell)

    dfs(0, set(), 0)
    return dict(zip(order, best))


def place_elements(
    elements: list[SceneElement], adjacencies: list[tuple[str, str]]
) -> PlacementResult:
    """Place every element on the grid, best-effort on adjacency pairs.

    Never fails on unsatisfiable constraints; unmet pairs are reported in
    the result.  Pairs naming unknown ids and self-pairs are dropped into
    ``dropped_pairs`` rather than raising, since composition is best-effort.
    """
    if len(elements) > GRID * GRID:
        raise ValueError(f"cannot place {len(elements)} elements on a {GRID}x{GRID} grid")
    ids = {el.id for el in elements}
    if len(ids) != len(elements):
        raise ValueError("duplicate element ids")
    pairs, dropped = _normalize_pairs(ids, adjacencies)

    adjacency: dict[str, set[str]] = {eid: set() for eid in ids}
    for a, b in pairs:
        adjacency[a].add(b)
        adjacency[b].add(a)

    order = [el.id for el in canonical_order(elements)]
    placements = _greedy(order, adjacency)

    if 0 < len(elements) <= EXACT_LIMIT and pairs:
        exact = _exact_best(order, pairs)
        if _satisfied_count(exact, pairs) > _satisfied_count(placements, pairs):
            placements = exact

    unsatisfied = [
        pair for pair in pairs if manhattan(placements[pair[0]], placements[pair[1]]) != 1
    ]
    return PlacementResult(placements=placements, unsatisfied=unsatisfied, dropped_pairs=dropped)
