"""Equipartitions of the vertex set and their balanced refinements."""

from __future__ import annotations

import json
import random

from .errors import BadOrder, BadPartition, RefinementTooFine


class Equipartition:
    """Ordered blocks of vertices covering 0..n-1 with sizes differing by at most 1.

    ``parent[i]`` records which block of a coarser partition block i came
    from, when this partition was produced by a refinement.
    """

    __slots__ = ("blocks", "parent", "_block_of")

    def __init__(self, blocks, parent=None):
        blocks = tuple(tuple(sorted(b)) for b in blocks)
        if not blocks:
            raise BadPartition("a partition needs at least one block")
        seen = set()
        total = 0
        for b in blocks:
            if not b:
                raise BadPartition("empty block")
            total += len(b)
            seen.update(b)
        if len(seen) != total:
            raise BadPartition("blocks overlap")
        n = total
        if seen != set(range(n)):
            raise BadPartition("blocks must cover exactly 0..n-1")
        sizes = {len(b) for b in blocks}
        if max(sizes) - min(sizes) > 1:
            raise BadPartition(f"block sizes {sorted(sizes)} differ by more than 1")
        if parent is not None:
            parent = tuple(int(i) for i in parent)
            if len(parent) != len(blocks):
                raise BadPartition("parent index list must match the block count")
        self.blocks = blocks
        self.parent = parent
        self._block_of = None

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def order(self) -> int:
        return len(self.blocks)

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def block_of(self, v: int) -> int:
        if self._block_of is None:
            lookup = {}
            for i, b in enumerate(self.blocks):
                for x in b:
                    lookup[x] = i
            self._block_of = lookup
        return self._block_of[v]

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.blocks)

    def __eq__(self, other):
        return isinstance(other, Equipartition) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return f"Equipartition(order={self.order}, n={self.n})"


def balanced_sizes(n: int, k: int) -> list[int]:
    """k block sizes summing to n, ceil(n/k) first."""
    small, extra = divmod(n, k)
    return [small + 1] * extra + [small] * (k - extra)


def equipartition(n: int, k: int, seed: int = 0) -> Equipartition:
    """Seeded uniform equipartition of 0..n-1 into k blocks."""
    if not 1 <= k <= n:
        raise BadOrder(f"order k={k} must lie in 1..{n}")
    vertices = list(range(n))
    random.Random(seed).shuffle(vertices)
    blocks = []
    at = 0
    for size in balanced_sizes(n, k):
        blocks.append(vertices[at:at + size])
        at += size
    return Equipartition(blocks)


def subdivision_counts(sizes, ell: int) -> tuple[int, list[int]]:
    """How an ell-fold refinement of blocks with these sizes must be sized.

    Returns (small, t) where every block of size s splits into t_i parts of
    size small+1 and ell - t_i parts of size small; the counts are forced by
    the global size-balance requirement.
    """
    n = sum(sizes)
    k = len(sizes)
    small = n // (k * ell)
    t = [s - ell * small for s in sizes]
    if any(ti < 0 or ti > ell for ti in t):
        raise BadPartition("sizes are not those of an equipartition")
    return small, t


def refine_equipartition(part: Equipartition, ell: int, seed: int = 0) -> Equipartition:
    """Split every block into ell sub-blocks, keeping global sizes within 1.

    Sub-blocks are listed parent-major, with parent indices recorded.
    """
    if ell < 1:
        raise RefinementTooFine(f"split factor {ell} must be at least 1")
    min_size = min(part.sizes())
    if ell > min_size:
        raise RefinementTooFine(f"split factor {ell} exceeds smallest block ({min_size})")
    small, t = subdivision_counts(part.sizes(), ell)
    rng = random.Random(seed)
    blocks = []
    parents = []
    for i, block in enumerate(part.blocks):
        vertices = list(block)
        rng.shuffle(vertices)
        at = 0
        for j in range(ell):
            size = small + 1 if j < t[i] else small
            blocks.append(vertices[at:at + size])
            parents.append(i)
            at += size
    return Equipartition(blocks, parent=parents)


def is_refinement(child: Equipartition, parent: Equipartition) -> bool:
    """True when every child block sits inside the parent block it names."""
    if child.parent is None or len(child.parent) != child.order:
        return False
    for b, pi in zip(child.blocks, child.parent):
        if not 0 <= pi < parent.order:
            return False
        if not set(b) <= set(parent.blocks[pi]):
            return False
    return True


def save_partition(part: Equipartition, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump([list(b) for b in part.blocks], fh)
        fh.write("\n")


def load_partition(path) -> Equipartition:
    with open(path, "r", encoding="ascii") as fh:
        data = json.load(fh)
    if not isinstance(data, list) or not all(isinstance(b, list) for b in data):
        raise BadPartition("partition file must be a JSON array of arrays")
    return Equipartition(data)
