"""Set-labeled template graphs and the expected editing cost they induce.

A template (here ``TypeGraph``) is a small complete graph whose vertices and
pairs carry *sets* of allowed colors or arrow states.  A concrete graph maps
into a template when some assignment of its vertices to template vertices
puts every pair's color inside the corresponding label set; vertices sharing
a template vertex must in addition satisfy that vertex's fiber conditions.
Templates into which no forbidden pattern maps certify recolorings free of
those patterns, and the quadratic form ``expected_edit_fraction`` prices the
recoloring for a random graph.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .embedding import thread_count
from .errors import (
    ArrowClosureViolation,
    BadState,
    ColorOutOfRange,
    DimensionMismatch,
    EmptyFamily,
    EmptyLabel,
    FullSelfLabel,
    KindMismatch,
    MissingPair,
    RegracutError,
    SearchSpaceTooLarge,
    SymmetryViolation,
)
from .graphs import (
    DIGRAPH_STATES,
    STATE_BACK,
    STATE_BI,
    STATE_CODES,
    STATE_FWD,
    STATE_NONE,
    ColoredGraph,
    Digraph,
    Palette,
    flip_state,
    palette,
)

RTYPE = "rtype"
DIRTYPE = "dirtype"


def _pair_index(k: int, u: int, v: int) -> int:
    return u * (2 * k - u - 1) // 2 + (v - u - 1)


def _flip_label(label: frozenset) -> frozenset:
    return frozenset(flip_state(s) for s in label)


@dataclass(frozen=True)
class TypeGraph:
    """Complete template graph with set-valued vertex and pair labels.

    ``self_labels[x]`` is the label of vertex x; ``pair_labels`` holds one
    label per unordered pair in row-major (u, v) order with u < v, read from
    u.  For digraph templates the reading from the other endpoint swaps the
    two single-arrow states; colored-graph labels are symmetric.
    """

    kind: str
    k: int
    self_labels: tuple
    pair_labels: tuple
    r: int | None = None
    palette: Palette | None = None

    def colors(self) -> tuple:
        """Ordered universe the labels draw from."""
        if self.kind == RTYPE:
            return tuple(range(1, self.r + 1))
        return tuple(s for s in DIGRAPH_STATES if s in self.palette)

    def phi(self, x: int, y: int) -> frozenset:
        """Label set of the ordered vertex pair (x, y); phi(x, x) is the
        fiber label of x."""
        if not (0 <= x < self.k and 0 <= y < self.k):
            raise RegracutError(f"template vertex out of range on ({x}, {y})")
        if x == y:
            return self.self_labels[x]
        if x < y:
            return self.pair_labels[_pair_index(self.k, x, y)]
        label = self.pair_labels[_pair_index(self.k, y, x)]
        return label if self.kind == RTYPE else _flip_label(label)


def validate_type(K: TypeGraph) -> None:
    """Raise unless K satisfies every structural invariant.

    Labels must be nonempty subsets of the color or state universe, vertex
    labels additionally proper.  Mis-matched pair orderings are caught by
    the factories; here the stored form is checked.
    """
    if K.kind not in (RTYPE, DIRTYPE):
        raise KindMismatch(f"unknown template kind {K.kind!r}")
    if K.k < 1:
        raise RegracutError(f"template needs at least one vertex, got {K.k}")
    if K.kind == RTYPE:
        if not isinstance(K.r, int) or K.r < 2:
            raise RegracutError("colored-graph template needs r >= 2")
    elif not isinstance(K.palette, Palette):
        raise RegracutError("digraph template needs a palette")
    universe = frozenset(K.colors())
    # Vertex labels may never be the full state alphabet; for digraph
    # templates that alphabet is all four states, so a restricted palette
    # may still be used whole (a tournament fiber is {fwd, back} under P4).
    full = universe if K.kind == RTYPE else frozenset(DIGRAPH_STATES)
    if len(K.self_labels) != K.k:
        raise DimensionMismatch(f"expected {K.k} vertex labels")
    if len(K.pair_labels) != K.k * (K.k - 1) // 2:
        raise DimensionMismatch("pair label count does not match k choose 2")
    for x, label in enumerate(K.self_labels):
        if not label:
            raise EmptyLabel(f"vertex {x} has an empty label")
        if not label <= universe:
            bad = sorted(label - universe, key=str)
            raise (ColorOutOfRange if K.kind == RTYPE else BadState)(
                f"vertex {x} label contains {bad}"
            )
        if label == full:
            raise FullSelfLabel(f"vertex {x} label is the full color set")
    for idx, label in enumerate(K.pair_labels):
        if not label:
            raise EmptyLabel(f"pair label {idx} is empty")
        if not label <= universe:
            bad = sorted(label - universe, key=str)
            raise (ColorOutOfRange if K.kind == RTYPE else BadState)(
                f"pair label {idx} contains {bad}"
            )


def _normalize_pairs(k: int, edge_labels: dict, kind: str) -> tuple:
    """Collapse an ordered-pair label dict to the u < v stored form,
    checking both-order consistency when a pair is given twice."""
    stored: dict[tuple[int, int], frozenset] = {}
    for (x, y), raw in edge_labels.items():
        if not (0 <= x < k and 0 <= y < k) or x == y:
            raise RegracutError(f"bad template pair ({x}, {y})")
        label = frozenset(raw)
        if x > y:
            x, y = y, x
            if kind == DIRTYPE:
                label = _flip_label(label)
        if (x, y) in stored and stored[(x, y)] != label:
            if kind == RTYPE:
                raise SymmetryViolation(f"pair ({x}, {y}) given two different labels")
            raise ArrowClosureViolation(
                f"pair ({x}, {y}) labels are not mirror images of each other"
            )
        stored[(x, y)] = label
    labels = []
    for u in range(k):
        for v in range(u + 1, k):
            if (u, v) not in stored:
                raise MissingPair(f"no label for template pair ({u}, {v})")
            labels.append(stored[(u, v)])
    return tuple(labels)


def rtype(r: int, self_labels, edge_labels: dict) -> TypeGraph:
    """Template over colors {1..r}; edge_labels maps vertex pairs (either
    order, consistently) to color sets."""
    selfs = tuple(frozenset(int(c) for c in lab) for lab in self_labels)
    k = len(selfs)
    pairs = _normalize_pairs(k, edge_labels, RTYPE)
    K = TypeGraph(kind=RTYPE, k=k, self_labels=selfs, pair_labels=pairs, r=int(r))
    validate_type(K)
    return K


def dirtype(pal, self_labels, edge_labels: dict) -> TypeGraph:
    """Digraph template over a palette (object or name); edge_labels maps
    ordered pairs to state sets read from the first vertex."""
    if isinstance(pal, str):
        pal = palette(pal)
    selfs = tuple(frozenset(str(s) for s in lab) for lab in self_labels)
    k = len(selfs)
    pairs = _normalize_pairs(k, edge_labels, DIRTYPE)
    K = TypeGraph(kind=DIRTYPE, k=k, self_labels=selfs, pair_labels=pairs, palette=pal)
    validate_type(K)
    return K


def _encode_label(K: TypeGraph, label: frozenset) -> tuple:
    if K.kind == RTYPE:
        return tuple(sorted(label))
    return tuple(sorted(STATE_CODES[s] for s in label))


def canonical_key(K: TypeGraph):
    """Relabeling-invariant identity: the lexicographically smallest ordered
    label matrix over all permutations of the template vertices."""
    head = (K.kind, K.r if K.kind == RTYPE else K.palette.name, K.k)
    best = None
    for perm in itertools.permutations(range(K.k)):
        mat = tuple(
            tuple(_encode_label(K, K.phi(perm[i], perm[j])) for j in range(K.k))
            for i in range(K.k)
        )
        if best is None or mat < best:
            best = mat
    return head + (best,)


class ForbiddenFamily:
    """Nonempty collection of forbidden patterns, all of one kind."""

    __slots__ = ("members",)

    def __init__(self, members):
        members = tuple(members)
        if not members:
            raise EmptyFamily("a forbidden family needs at least one member")
        first = members[0]
        if isinstance(first, ColoredGraph):
            if any(not isinstance(m, ColoredGraph) or m.r != first.r for m in members):
                raise KindMismatch("family members must all share the same color count")
        elif isinstance(first, Digraph):
            if any(not isinstance(m, Digraph) for m in members):
                raise KindMismatch("family mixes digraphs with colored graphs")
        else:
            raise KindMismatch(f"unsupported family member {type(first).__name__}")
        self.members = members

    @property
    def kind(self) -> str:
        return RTYPE if isinstance(self.members[0], ColoredGraph) else DIRTYPE

    @property
    def r(self) -> int | None:
        return self.members[0].r if self.kind == RTYPE else None

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class TypeFamily:
    """Templates admitting no forbidden pattern, complete up to size_bound."""

    types: tuple
    size_bound: int

    def __iter__(self):
        return iter(self.types)

    def __len__(self) -> int:
        return len(self.types)


def _fiber_ok_rgraph(H: ColoredGraph, K: TypeGraph, assign, v: int, u: int) -> bool:
    lab = K.self_labels[u]
    return all(
        assign[w] != u or H.color(w, v) in lab for w in range(v)
    )


def _oriented_arcs(H: Digraph, fiber: list[int]) -> list[tuple[int, int]]:
    arcs = []
    for a, b in itertools.combinations(fiber, 2):
        s = DIGRAPH_STATES[H.matrix[a, b]]
        if s == STATE_FWD:
            arcs.append((a, b))
        elif s == STATE_BACK:
            arcs.append((b, a))
    return arcs


def _is_acyclic(vertices: list[int], arcs: list[tuple[int, int]]) -> bool:
    indeg = {v: 0 for v in vertices}
    out: dict[int, list[int]] = {v: [] for v in vertices}
    for a, b in arcs:
        out[a].append(b)
        indeg[b] += 1
    queue = [v for v in vertices if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return seen == len(vertices)


def _fiber_ok_digraph(H: Digraph, K: TypeGraph, assign, v: int, u: int) -> bool:
    lab = K.self_labels[u]
    has_fwd = STATE_FWD in lab
    has_back = STATE_BACK in lab
    fiber = [w for w in range(v) if assign[w] == u]
    for w in fiber:
        s = DIGRAPH_STATES[H.matrix[min(w, v), max(w, v)]]
        if s == STATE_NONE:
            if STATE_NONE not in lab:
                return False
        elif s == STATE_BI:
            if STATE_BI not in lab:
                return False
        elif not (has_fwd or has_back):
            return False
    if has_fwd != has_back:
        # single-arrow fibers must stay inside some transitive order
        fiber.append(v)
        if not _is_acyclic(fiber, _oriented_arcs(H, fiber)):
            return False
    return True


def embeds(H, K: TypeGraph) -> tuple[bool, tuple | None]:
    """Search for a vertex map from H into the template K.

    Cross pairs need their color inside the pair's label set; vertices
    mapped together must satisfy the fiber conditions of the shared
    template vertex.  Returns (found, map) with the lexicographically first
    witness, or (found, None) when no map exists.
    """
    if isinstance(H, ColoredGraph):
        if K.kind != RTYPE:
            raise KindMismatch("colored graph against a digraph template")
        if H.r != K.r:
            raise KindMismatch(f"pattern has r={H.r} but template has r={K.r}")
    elif isinstance(H, Digraph):
        if K.kind != DIRTYPE:
            raise KindMismatch("digraph against a colored-graph template")
    else:
        raise KindMismatch(f"unsupported pattern {type(H).__name__}")
    n, k = H.n, K.k
    assign = [-1] * n
    directed = isinstance(H, Digraph)

    def ok(v: int, u: int) -> bool:
        for w in range(v):
            if assign[w] == u:
                continue
            if directed:
                s = DIGRAPH_STATES[H.matrix[w, v]]
                if s not in K.phi(assign[w], u):
                    return False
            elif H.color(w, v) not in K.phi(assign[w], u):
                return False
        if directed:
            return _fiber_ok_digraph(H, K, assign, v, u)
        return _fiber_ok_rgraph(H, K, assign, v, u)

    def extend(v: int) -> bool:
        if v == n:
            return True
        for u in range(k):
            if ok(v, u):
                assign[v] = u
                if extend(v + 1):
                    return True
                assign[v] = -1
        return False

    if extend(0):
        return True, tuple(assign)
    return False, None


_CANDIDATE_BUDGET = 2_000_000


def _nonempty_subsets(elements: tuple) -> list[frozenset]:
    out = []
    for mask in range(1, 1 << len(elements)):
        out.append(frozenset(e for i, e in enumerate(elements) if mask >> i & 1))
    return out


def enumerate_types(kind, k_max: int, family: ForbiddenFamily) -> TypeFamily:
    """All templates on up to k_max vertices that admit no family member.

    kind is a color count (colored-graph templates) or a palette object or
    name (digraph templates).  Candidates are deduplicated by their minimal
    relabeled matrix before the embedding filter runs; with
    REGRACUT_THREADS > 1 the filter is applied to chunks in parallel and
    merged in order.
    """
    if k_max < 1:
        raise RegracutError(f"k_max must be at least 1, got {k_max}")
    if isinstance(kind, int):
        if family.kind != RTYPE or family.r != kind:
            raise KindMismatch("family does not match the requested color count")
        elements = tuple(range(1, kind + 1))
        full = frozenset(elements)
        make = lambda selfs, pairs, k: TypeGraph(
            kind=RTYPE, k=k, self_labels=selfs, pair_labels=pairs, r=kind
        )
    else:
        pal = palette(kind) if isinstance(kind, str) else kind
        if family.kind != DIRTYPE:
            raise KindMismatch("family does not match the requested palette")
        elements = tuple(s for s in DIGRAPH_STATES if s in pal)
        full = frozenset(DIGRAPH_STATES)
        make = lambda selfs, pairs, k: TypeGraph(
            kind=DIRTYPE, k=k, self_labels=selfs, pair_labels=pairs, palette=pal
        )

    subsets = _nonempty_subsets(elements)
    proper = [s for s in subsets if s != full]
    n_self, n_edge = len(proper), len(subsets)
    budget = sum(n_self**k * n_edge ** (k * (k - 1) // 2) for k in range(1, k_max + 1))
    if budget > _CANDIDATE_BUDGET:
        raise SearchSpaceTooLarge(
            f"{budget} candidate templates exceed the exhaustive budget"
        )

    candidates = []
    seen = set()
    for k in range(1, k_max + 1):
        pair_count = k * (k - 1) // 2
        for selfs in itertools.product(proper, repeat=k):
            for pairs in itertools.product(subsets, repeat=pair_count):
                K = make(selfs, pairs, k)
                key = canonical_key(K)
                if key not in seen:
                    seen.add(key)
                    candidates.append(K)

    def admits_none(K: TypeGraph) -> bool:
        return not any(embeds(H, K)[0] for H in family)

    workers = thread_count()
    if workers > 1 and len(candidates) >= 2 * workers:
        chunks = [candidates[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flags = list(pool.map(lambda ch: [admits_none(K) for K in ch], chunks))
        keep = [False] * len(candidates)
        for i in range(workers):
            for j, flag in enumerate(flags[i]):
                keep[i + j * workers] = flag
        kept = tuple(K for K, f in zip(candidates, keep) if f)
    else:
        kept = tuple(K for K in candidates if admits_none(K))
    return TypeFamily(types=kept, size_bound=k_max)


def expected_edit_fraction(K: TypeGraph, dist) -> float:
    """Average fraction of pairs a random graph must recolor to conform to K.

    Evaluates (1/k^2) 1^T (J - sum_rho p_rho A_rho) 1 where A_rho indicates
    which labels contain rho, diagonal included.  Digraph templates take
    dist = (p, q) for the both-arcs and per-direction single-arc weights;
    a pair allowing both directions counts the single-arc weight twice.
    """
    dist = tuple(float(x) for x in dist)
    k = K.k
    total = 0.0
    if K.kind == RTYPE:
        if len(dist) != K.r:
            raise DimensionMismatch(f"expected {K.r} weights, got {len(dist)}")
        for i in range(k):
            for j in range(k):
                lab = K.phi(i, j)
                total += 1.0 - sum(dist[c - 1] for c in lab)
    else:
        if len(dist) != 2:
            raise DimensionMismatch(f"expected (p, q), got {len(dist)} weights")
        p, q = dist
        for i in range(k):
            for j in range(k):
                lab = K.phi(i, j)
                arrows = (STATE_FWD in lab) + (STATE_BACK in lab)
                covered = (
                    (1.0 - p - 2.0 * q) * (STATE_NONE in lab)
                    + p * (STATE_BI in lab)
                    + q * arrows
                )
                total += 1.0 - covered
    return total / (k * k)


@dataclass(frozen=True)
class BoundReport:
    """Best type-derived asymptotic floor on the distance to the property."""

    type: TypeGraph
    fraction: float
    value: float


def edit_distance_lower_bound(dist, family: TypeFamily, n: int) -> BoundReport:
    """Strongest expected-fraction bound over the family, scaled to n(n-1)/2.

    Ties keep the earliest type in enumeration order.
    """
    if not family.types:
        raise EmptyFamily("no templates to bound with")
    best = None
    best_f = -1.0
    for K in family:
        f = expected_edit_fraction(K, dist)
        if f > best_f:
            best, best_f = K, f
    return BoundReport(type=best, fraction=best_f, value=best_f * n * (n - 1) / 2)


def theorem_error_terms(n: int, k: int, r: int, eps: float) -> dict:
    """Finite-size slack between the expected-fraction display and n(n-1)/2.

    The five terms cover equipartition rounding, the diagonal of the
    quadratic form, density concentration, the irregular-pair allowance,
    and the deviating-pair allowance at regularity parameter eps.
    """
    if k < 1 or n < k:
        raise RegracutError("need 1 <= k <= n for the error display")
    lo = n // k
    hi = math.ceil(n / k)
    pairs = k * (k - 1) // 2
    terms = {
        "rounding": n * (n - 1) / 2 - k * k / 2 * lo * lo,
        "diagonal": k / 2 * lo * lo,
        "density_concentration": r * pairs * lo ** (5 / 3),
        "irregular_pairs": eps * r * pairs * hi * hi,
        "deviating_pairs": eps * k * k * hi * hi,
    }
    terms["total"] = sum(terms.values())
    return terms


def type_to_json(K: TypeGraph) -> dict:
    """Plain-dict form of a template, pair labels read from the lower vertex."""
    if K.kind == RTYPE:
        head = {"kind": RTYPE, "r": K.r}
        enc = sorted
    else:
        head = {"kind": DIRTYPE, "palette": K.palette.name}
        enc = lambda lab: sorted(lab, key=STATE_CODES.__getitem__)
    edges = [
        {"u": u, "v": v, "labels": enc(K.phi(u, v))}
        for u in range(K.k)
        for v in range(u + 1, K.k)
    ]
    return head | {"k": K.k, "self": [enc(lab) for lab in K.self_labels], "edges": edges}


def type_from_json(obj: dict) -> TypeGraph:
    """Inverse of type_to_json; validates the result."""
    try:
        kind = obj["kind"]
        selfs = obj["self"]
        edges = {(int(e["u"]), int(e["v"])): e["labels"] for e in obj["edges"]}
    except (KeyError, TypeError) as exc:
        raise RegracutError(f"malformed template object: {exc}") from None
    if int(obj.get("k", len(selfs))) != len(selfs):
        raise DimensionMismatch("k does not match the number of vertex labels")
    if kind == RTYPE:
        return rtype(int(obj["r"]), selfs, edges)
    if kind == DIRTYPE:
        return dirtype(obj.get("palette", "P0"), selfs, edges)
    raise KindMismatch(f"unknown template kind {kind!r}")
