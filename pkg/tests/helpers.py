"""Shared builders for the test suite.

Everything here is deterministic; randomness always flows through an
explicit seed so failures reproduce.
"""

import itertools

import numpy as np

import regracut as rg


def mono_rgraph(n, r, color):
    """Complete r-graph with every pair carrying the same color."""
    return rg.new_rgraph(n, r, [(u, v, color) for u, v in itertools.combinations(range(n), 2)])


def mono_digraph(n, state):
    return rg.new_digraph(n, [(u, v, state) for u, v in itertools.combinations(range(n), 2)])


def two_block_rgraph(half, inside=1, across=2):
    """Planted structure on 2*half vertices: color `inside` within each
    half, color `across` between the halves."""
    n = 2 * half
    pairs = []
    for u, v in itertools.combinations(range(n), 2):
        same = (u < half) == (v < half)
        pairs.append((u, v, inside if same else across))
    return rg.new_rgraph(n, 2, pairs)


def rgraph_from_matrix(mat, r):
    """Build an r-graph from a symmetric integer matrix (diagonal ignored)."""
    n = len(mat)
    return rg.new_rgraph(
        n, r, [(u, v, int(mat[u][v])) for u, v in itertools.combinations(range(n), 2)]
    )


def density_direct(G, A, B):
    """Per-channel densities via a slice-and-count independent of
    density_vector's internals; the reference oracle for density tests."""
    labels = rg.channel_labels(G)
    counts = {lab: 0 for lab in labels}
    if isinstance(G, rg.ColoredGraph):
        for a in A:
            for b in B:
                counts[G.color(a, b)] += 1
    else:
        for a in A:
            for b in B:
                counts[G.arc(a, b)] += 1
    total = len(A) * len(B)
    return np.array([counts[lab] / total for lab in labels])


def random_disjoint_sets(rng, n, amin=2):
    """Two disjoint nonempty vertex subsets of 0..n-1."""
    perm = rng.permutation(n)
    a = int(rng.integers(amin, max(amin + 1, n // 2)))
    b = int(rng.integers(amin, max(amin + 1, n - a)))
    return sorted(int(x) for x in perm[:a]), sorted(int(x) for x in perm[a:a + b])
