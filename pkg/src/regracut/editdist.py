"""Pair-recoloring distance to a forbidden-pattern-free property.

The distance between two graphs on a shared vertex set counts the unordered
pairs whose color or arrow state differs.  The distance from a graph to the
property of admitting no induced copy of any family member is found exactly
by iterative-deepening branch and bound: every surviving copy must lose at
least one of its pairs, so branching over a single found copy is complete.
Template fitting gives certified upper bounds on the same quantity.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import numpy as np

from .density import (
    IRREGULAR,
    REGULAR,
    channel_labels,
    density_vector,
    irregularity_witness_heuristic,
    is_regular_exact,
    _matrix_plus1,
)
from .errors import (
    KindMismatch,
    OverlappingSets,
    RegracutError,
    SizeMismatch,
    TooLargeForExact,
)
from .graphs import (
    DIGRAPH_STATES,
    STATE_BACK,
    STATE_BI,
    STATE_FWD,
    STATE_NONE,
    STATE_CODES,
    ColoredGraph,
    Digraph,
    P0,
)
from .typegraphs import DIRTYPE, RTYPE, ForbiddenFamily, TypeGraph, embeds, validate_type


def _same_kind(G, H) -> None:
    if isinstance(G, ColoredGraph) != isinstance(H, ColoredGraph):
        raise KindMismatch("cannot compare a colored graph with a digraph")
    if isinstance(G, ColoredGraph) and G.r != H.r:
        raise KindMismatch(f"color counts differ: {G.r} vs {H.r}")


def edit_distance(G, H) -> int:
    """Number of unordered pairs on which the two graphs disagree."""
    _same_kind(G, H)
    if G.n != H.n:
        raise SizeMismatch(f"vertex counts differ: {G.n} vs {H.n}")
    iu = np.triu_indices(G.n, k=1)
    return int(np.count_nonzero(G.matrix[iu] != H.matrix[iu]))


def find_induced_copy(G, H) -> tuple | None:
    """Injective vertex map realizing H inside G exactly, or None.

    Every pair of the image must carry the same color (digraphs: the same
    ordered state) as the corresponding pair of H.
    """
    _same_kind(G, H)
    n, h = G.n, H.n
    if h > n:
        return None
    mg, _ = _matrix_plus1(G)
    mh, _ = _matrix_plus1(H)
    assign = [-1] * h
    used = [False] * n

    def extend(v: int) -> bool:
        if v == h:
            return True
        for w in range(n):
            if used[w]:
                continue
            if all(mg[assign[x], w] == mh[x, v] for x in range(v)):
                assign[v] = w
                used[w] = True
                if extend(v + 1):
                    return True
                used[w] = False
                assign[v] = -1
        return False

    if extend(0):
        return tuple(assign)
    return None


def has_induced_copy(G, H) -> bool:
    return find_induced_copy(G, H) is not None


def _find_any_copy(G, family: ForbiddenFamily) -> tuple | None:
    for H in family:
        image = find_induced_copy(G, H)
        if image is not None:
            return image
    return None


def _alternatives(G, u: int, v: int):
    if isinstance(G, ColoredGraph):
        current = G.color(u, v)
        return [c for c in range(1, G.r + 1) if c != current]
    current = G.pair_state(u, v)
    return [s for s in DIGRAPH_STATES if s != current]


def _recolored(G, u: int, v: int, value):
    if isinstance(G, ColoredGraph):
        return G.with_color(u, v, value)
    return G.with_state(u, v, value)


def distance_to_property(G, family: ForbiddenFamily, cap: int | None = None):
    """Minimum number of pair recolorings ridding G of every family member.

    Returns (distance, witness graph).  Iterative deepening: at each budget
    the search finds one induced copy and branches over recoloring each of
    its pairs to each alternative value, never touching a pair twice, which
    is complete because an optimal witness disagrees with the current graph
    somewhere inside every copy the current graph still contains.
    """
    if (family.kind == RTYPE) != isinstance(G, ColoredGraph):
        raise KindMismatch("family kind does not match the graph")
    if family.kind == RTYPE and family.r != G.r:
        raise KindMismatch("family color count does not match the graph")
    if cap is None:
        cap = 7 if isinstance(G, ColoredGraph) else 6
    if G.n > cap:
        raise TooLargeForExact(f"n={G.n} exceeds the exact-search cap {cap}")

    def search(g, budget: int, touched: set):
        image = _find_any_copy(g, family)
        if image is None:
            return g
        if budget == 0:
            return None
        for u, v in itertools.combinations(sorted(image), 2):
            if (u, v) in touched:
                continue
            touched.add((u, v))
            for value in _alternatives(g, u, v):
                result = search(_recolored(g, u, v, value), budget - 1, touched)
                if result is not None:
                    touched.discard((u, v))
                    return result
            touched.discard((u, v))
        return None

    max_budget = G.n * (G.n - 1) // 2
    for budget in range(max_budget + 1):
        witness = search(G, budget, set())
        if witness is not None:
            return budget, witness
    raise RegracutError(
        "no recoloring on this vertex count avoids the family; "
        "the target property is empty here"
    )


@dataclass(frozen=True)
class FitResult:
    graph: object
    cost: int
    assignment: tuple


def _balanced_assignment(n: int, k: int) -> list[int]:
    return [v * k // n for v in range(n)]


def _dir_fiber_target(state: str, label: frozenset) -> str:
    """Conformant state for a within-fiber pair currently in `state`; single
    arrows are oriented low-to-high when only one direction is allowed."""
    has_fwd = STATE_FWD in label
    has_back = STATE_BACK in label
    if state == STATE_NONE and STATE_NONE in label:
        return state
    if state == STATE_BI and STATE_BI in label:
        return state
    if state in (STATE_FWD, STATE_BACK) and (has_fwd or has_back):
        if has_fwd and has_back:
            return state
        return STATE_FWD
    if STATE_NONE in label:
        return STATE_NONE
    if STATE_BI in label:
        return STATE_BI
    return STATE_FWD


def _fit_once(G, K: TypeGraph, assign: list[int]):
    m = G.matrix.copy()
    if K.kind == RTYPE:
        for u in range(G.n):
            for v in range(u + 1, G.n):
                allowed = K.phi(assign[u], assign[v])
                if m[u, v] not in allowed:
                    m[u, v] = m[v, u] = min(allowed)
        return ColoredGraph(G.n, G.r, m)
    for u in range(G.n):
        for v in range(u + 1, G.n):
            state = DIGRAPH_STATES[m[u, v]]
            if assign[u] == assign[v]:
                target = _dir_fiber_target(state, K.self_labels[assign[u]])
            else:
                allowed = K.phi(assign[u], assign[v])
                if state in allowed:
                    target = state
                else:
                    target = next(s for s in DIGRAPH_STATES if s in allowed)
            code = STATE_CODES[target]
            m[u, v] = code
            m[v, u] = STATE_CODES[(STATE_BACK if target == STATE_FWD
                                   else STATE_FWD if target == STATE_BACK else target)]
    return Digraph(G.n, m)


def fit_to_type(G, K: TypeGraph, assignment="balanced", trials: int = 10, seed: int = 0) -> FitResult:
    """Cheapest conformant recoloring of G for a fiber assignment.

    assignment is "balanced" (contiguous slices in vertex order), an explicit
    vertex-to-template-vertex sequence, or "best_of", which tries `trials`
    seeded random balanced assignments and keeps the cheapest (first wins
    ties).  Cross-fiber pairs keep their value when allowed and otherwise
    take the first allowed value in canonical order; fibers follow the
    template vertex's own label, single arrows oriented by vertex index.
    """
    if (K.kind == RTYPE) != isinstance(G, ColoredGraph):
        raise KindMismatch("template kind does not match the graph")
    if K.kind == RTYPE and K.r != G.r:
        raise KindMismatch("template color count does not match the graph")
    if isinstance(assignment, str) and assignment == "best_of":
        if trials < 1:
            raise RegracutError("best_of needs at least one trial")
        rng = random.Random(seed)
        best = None
        for _ in range(trials):
            order = list(range(G.n))
            rng.shuffle(order)
            assign = [0] * G.n
            for slot, v in enumerate(order):
                assign[v] = slot * K.k // G.n
            fitted = _fit_once(G, K, assign)
            cost = edit_distance(G, fitted)
            if best is None or cost < best.cost:
                best = FitResult(graph=fitted, cost=cost, assignment=tuple(assign))
        return best
    if isinstance(assignment, str):
        if assignment != "balanced":
            raise RegracutError(f"unknown assignment mode {assignment!r}")
        assign = _balanced_assignment(G.n, K.k)
    else:
        assign = [int(x) for x in assignment]
        if len(assign) != G.n:
            raise SizeMismatch("assignment length does not match the vertex count")
        if any(not 0 <= x < K.k for x in assign):
            raise RegracutError("assignment targets a missing template vertex")
    fitted = _fit_once(G, K, assign)
    return FitResult(graph=fitted, cost=edit_distance(G, fitted), assignment=tuple(assign))


@dataclass(frozen=True)
class ConstructResult:
    """Outcome of building a template from certified block data."""

    type: TypeGraph | None
    failure: str | None = None
    detail: str | None = None

    @property
    def ok(self) -> bool:
        return self.type is not None


EMPTY_EDGE_LABEL = "empty_edge_label"
NO_VALID_VERTEX_LABELS = "no_valid_vertex_labels"


def construct_type_from_partition(
    G,
    blocks,
    delta: float,
    efun,
    family: ForbiddenFamily,
    certifier: str = "heuristic",
    palette=None,
    exact_cap: int = 12,
) -> ConstructResult:
    """Template whose pair labels hold the certified dense colors of the
    given blocks, with fiber labels found by exhaustive search.

    A color joins the label of pair (i, j) when the block pair is not
    certified irregular at efun(k) (exact certification when requested) and
    its density is at least delta.  Fiber labels are the lexicographically
    first assignment of nonempty proper subsets making the template admit
    no family member; both failure modes are reported, not raised.
    """
    blocks = [sorted(int(v) for v in b) for b in blocks]
    k = len(blocks)
    if k < 1:
        raise RegracutError("need at least one block")
    seen: set[int] = set()
    for b in blocks:
        if not b:
            raise RegracutError("blocks must be nonempty")
        if seen.intersection(b):
            raise OverlappingSets("blocks overlap")
        seen.update(b)
    directed = isinstance(G, Digraph)
    if (family.kind == DIRTYPE) != directed:
        raise KindMismatch("family kind does not match the graph")
    if not directed and family.r != G.r:
        raise KindMismatch("family color count does not match the graph")
    gamma = efun(k)
    labels = channel_labels(G)
    if directed:
        pal = palette if palette is not None else P0
        universe = tuple(s for s in DIGRAPH_STATES if s in pal)
    else:
        universe = tuple(range(1, G.r + 1))

    pair_labels = {}
    for i in range(k):
        for j in range(i + 1, k):
            if certifier == "exact":
                report = is_regular_exact(G, blocks[i], blocks[j], gamma, cap=exact_cap)
                certified = report.verdict == REGULAR
            else:
                report = irregularity_witness_heuristic(G, blocks[i], blocks[j], gamma)
                certified = report.verdict != IRREGULAR
            dens = density_vector(G, blocks[i], blocks[j])
            label = frozenset(
                lab for idx, lab in enumerate(labels)
                if certified and dens[idx] >= delta
            )
            if not label:
                return ConstructResult(
                    type=None,
                    failure=EMPTY_EDGE_LABEL,
                    detail=f"block pair ({i}, {j}) offers no certified dense color",
                )
            if directed and not label <= set(universe):
                return ConstructResult(
                    type=None,
                    failure=EMPTY_EDGE_LABEL,
                    detail=f"block pair ({i}, {j}) is dense outside the palette",
                )
            pair_labels[(i, j)] = label

    # The full palette is a legal fiber label unless it is the whole state
    # alphabet (always so for colors, only under P0 for digraphs).
    full_mask = (1 << len(universe)) - 1
    skip_full = not directed or len(universe) == len(DIGRAPH_STATES)
    subsets = []
    for mask in range(1, full_mask + 1):
        if mask == full_mask and skip_full:
            continue
        subsets.append(frozenset(e for t, e in enumerate(universe) if mask >> t & 1))
    for selfs in itertools.product(subsets, repeat=k):
        if directed:
            K = TypeGraph(
                kind=DIRTYPE, k=k, self_labels=selfs,
                pair_labels=tuple(pair_labels[p] for p in sorted(pair_labels)),
                palette=pal,
            )
        else:
            K = TypeGraph(
                kind=RTYPE, k=k, self_labels=selfs,
                pair_labels=tuple(pair_labels[p] for p in sorted(pair_labels)),
                r=G.r,
            )
        validate_type(K)
        if not any(embeds(H, K)[0] for H in family):
            return ConstructResult(type=K)
    return ConstructResult(
        type=None,
        failure=NO_VALID_VERTEX_LABELS,
        detail="no proper nonempty fiber labeling avoids the family",
    )
