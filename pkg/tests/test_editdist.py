"""Edit distance, induced copies, property distance, template fitting."""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

import regracut as rg
from regracut.errors import (
    KindMismatch,
    OverlappingSets,
    RegracutError,
    SizeMismatch,
    TooLargeForExact,
)

from helpers import mono_digraph, mono_rgraph
from test_typegraphs import _map_conforms

ALL_STATES = ("none", "bi", "fwd", "back")


def color_triangle(color=1):
    return rg.new_rgraph(3, 2, [(0, 1, color), (0, 2, color), (1, 2, color)])


def differing_pairs(G, H):
    directed = isinstance(G, rg.Digraph)
    count = 0
    for u, v in itertools.combinations(range(G.n), 2):
        a = G.arc(u, v) if directed else G.color(u, v)
        b = H.arc(u, v) if directed else H.color(u, v)
        count += a != b
    return count


def copy_exists_brute(G, H):
    directed = isinstance(G, rg.Digraph)
    for image in itertools.permutations(range(G.n), H.n):
        if _image_matches(G, H, image, directed):
            return True
    return False


def _image_matches(G, H, image, directed):
    for i, j in itertools.combinations(range(H.n), 2):
        u, v = image[i], image[j]
        if directed:
            if G.arc(u, v) != H.arc(i, j):
                return False
        elif G.color(u, v) != H.color(i, j):
            return False
    return True


def random_rgraph(data, n, r=2):
    return rg.new_rgraph(
        n,
        r,
        [
            (u, v, data.draw(st.integers(1, r)))
            for u, v in itertools.combinations(range(n), 2)
        ],
    )


class TestEditDistance:
    def test_identical_graphs(self):
        G = mono_rgraph(5, 2, 1)
        assert rg.edit_distance(G, G) == 0

    def test_complement_touches_every_pair(self):
        assert rg.edit_distance(mono_rgraph(5, 2, 1), mono_rgraph(5, 2, 2)) == 10

    def test_single_flip(self):
        G = mono_rgraph(4, 2, 1)
        assert rg.edit_distance(G, G.with_color(1, 3, 2)) == 1

    def test_digraph_pair_is_one_edit(self):
        G = mono_digraph(4, "bi")
        assert rg.edit_distance(G, G.with_state(0, 2, "none")) == 1
        assert rg.edit_distance(G, mono_digraph(4, "fwd")) == 6

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_counts_differing_pairs(self, data):
        n = data.draw(st.integers(2, 7), label="n")
        G = random_rgraph(data, n, r=3)
        H = random_rgraph(data, n, r=3)
        d = rg.edit_distance(G, H)
        assert d == differing_pairs(G, H)
        assert d == rg.edit_distance(H, G)

    def test_mismatch_guards(self):
        with pytest.raises(SizeMismatch):
            rg.edit_distance(mono_rgraph(5, 2, 1), mono_rgraph(3, 2, 1))
        with pytest.raises(KindMismatch):
            rg.edit_distance(mono_rgraph(5, 2, 1), mono_digraph(5, "bi"))
        with pytest.raises(KindMismatch):
            rg.edit_distance(mono_rgraph(5, 2, 1), mono_rgraph(5, 3, 1))


class TestInducedCopies:
    def test_planted_triangle_found(self):
        G = rg.new_rgraph(
            4, 2, [(0, 1, 1), (0, 2, 1), (1, 2, 1), (0, 3, 2), (1, 3, 2), (2, 3, 2)]
        )
        image = rg.find_induced_copy(G, color_triangle())
        assert image == (0, 1, 2)
        assert rg.has_induced_copy(G, color_triangle())

    def test_absent_pattern(self):
        assert rg.find_induced_copy(mono_rgraph(5, 2, 2), color_triangle()) is None
        assert not rg.has_induced_copy(mono_rgraph(5, 2, 2), color_triangle())

    def test_pattern_larger_than_host(self):
        assert rg.find_induced_copy(mono_rgraph(2, 2, 1), color_triangle()) is None

    def test_exact_color_match_required(self):
        # A color-2 pair is not a copy of a color-1 pair.
        edge2 = rg.new_rgraph(2, 2, [(0, 1, 2)])
        host = mono_rgraph(3, 2, 1)
        assert rg.find_induced_copy(host, edge2) is None

    def test_arc_direction_match_required(self):
        host = rg.new_digraph(3, [(0, 1, "fwd"), (1, 2, "fwd"), (0, 2, "fwd")])
        fwd_pair = rg.new_digraph(2, [(0, 1, "fwd")])
        back_pair = rg.new_digraph(2, [(0, 1, "back")])
        image = rg.find_induced_copy(host, fwd_pair)
        assert image is not None
        # back means high-to-low, so the same host arc appears reversed.
        rev = rg.find_induced_copy(host, back_pair)
        assert rev is not None
        u, v = rev
        assert host.arc(u, v) == "back"

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_matches_exhaustive_search(self, data):
        n = data.draw(st.integers(1, 5), label="n")
        m = data.draw(st.integers(1, min(3, n)), label="m")
        G = random_rgraph(data, n)
        H = random_rgraph(data, m)
        image = rg.find_induced_copy(G, H)
        assert (image is not None) == copy_exists_brute(G, H)
        if image is not None:
            assert len(set(image)) == len(image)
            assert _image_matches(G, H, image, directed=False)

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_matches_exhaustive_search_digraph(self, data):
        n = data.draw(st.integers(1, 4), label="n")
        m = data.draw(st.integers(1, min(3, n)), label="m")
        G = rg.new_digraph(
            n,
            [
                (u, v, data.draw(st.sampled_from(ALL_STATES)))
                for u, v in itertools.combinations(range(n), 2)
            ],
        )
        H = rg.new_digraph(
            m,
            [
                (u, v, data.draw(st.sampled_from(ALL_STATES)))
                for u, v in itertools.combinations(range(m), 2)
            ],
        )
        image = rg.find_induced_copy(G, H)
        assert (image is not None) == copy_exists_brute(G, H)
        if image is not None:
            assert _image_matches(G, H, image, directed=True)


class TestDistanceToProperty:
    def test_already_avoiding(self):
        family = rg.ForbiddenFamily([color_triangle()])
        d, witness = rg.distance_to_property(mono_rgraph(5, 2, 2), family)
        assert d == 0
        assert rg.edit_distance(witness, mono_rgraph(5, 2, 2)) == 0

    def test_triangle_needs_one_edit(self):
        family = rg.ForbiddenFamily([color_triangle()])
        d, witness = rg.distance_to_property(color_triangle(), family)
        assert d == 1
        assert not rg.has_induced_copy(witness, color_triangle())
        assert rg.edit_distance(color_triangle(), witness) == 1

    def test_forbidden_edge_forces_full_recolor(self):
        # Avoiding a color-1 pair means recoloring every color-1 pair.
        family = rg.ForbiddenFamily([rg.new_rgraph(2, 2, [(0, 1, 1)])])
        for bits in itertools.product((1, 2), repeat=6):
            pairs = list(itertools.combinations(range(4), 2))
            G = rg.new_rgraph(4, 2, [(u, v, c) for (u, v), c in zip(pairs, bits)])
            d, witness = rg.distance_to_property(G, family)
            assert d == sum(1 for c in bits if c == 1)
            assert rg.edit_distance(witness, mono_rgraph(4, 2, 2)) == 0

    @given(st.data())
    @settings(max_examples=25, deadline=None)
    def test_matches_minimum_over_all_recolorings(self, data):
        family = rg.ForbiddenFamily([color_triangle()])
        G = random_rgraph(data, 4)
        d, witness = rg.distance_to_property(G, family)
        assert not rg.has_induced_copy(witness, color_triangle())
        assert rg.edit_distance(G, witness) == d
        best = min(
            differing_pairs(G, H)
            for bits in itertools.product((1, 2), repeat=6)
            for H in [
                rg.new_rgraph(
                    4,
                    2,
                    [
                        (u, v, c)
                        for (u, v), c in zip(itertools.combinations(range(4), 2), bits)
                    ],
                )
            ]
            if not rg.has_induced_copy(H, color_triangle())
        )
        assert d == best

    def test_digraph_family(self):
        family = rg.ForbiddenFamily([rg.new_digraph(2, [(0, 1, "bi")])])
        G = rg.new_digraph(3, [(0, 1, "bi"), (0, 2, "fwd"), (1, 2, "bi")])
        d, witness = rg.distance_to_property(G, family)
        assert d == 2
        assert all(
            witness.arc(u, v) != "bi" for u, v in itertools.combinations(range(3), 2)
        )

    def test_exact_cap_guard(self):
        family = rg.ForbiddenFamily([color_triangle()])
        with pytest.raises(TooLargeForExact):
            rg.distance_to_property(mono_rgraph(8, 2, 1), family)

    def test_kind_guards(self):
        family = rg.ForbiddenFamily([color_triangle()])
        with pytest.raises(KindMismatch):
            rg.distance_to_property(mono_digraph(4, "bi"), family)
        with pytest.raises(KindMismatch):
            rg.distance_to_property(mono_rgraph(4, 3, 1), family)

    def test_empty_property_is_an_error(self):
        lone = rg.ForbiddenFamily([rg.new_rgraph(1, 2, [])])
        with pytest.raises(RegracutError):
            rg.distance_to_property(color_triangle(), lone)


class TestFitToType:
    def test_full_recolor_to_single_fiber(self):
        fit = rg.fit_to_type(mono_rgraph(5, 2, 1), rg.rtype(2, [{2}], {}))
        assert fit.cost == 10
        assert fit.assignment == (0, 0, 0, 0, 0)
        assert rg.edit_distance(fit.graph, mono_rgraph(5, 2, 2)) == 0

    def test_already_conformant_costs_nothing(self):
        pairs = []
        for u, v in itertools.combinations(range(6), 2):
            same = (u < 3) == (v < 3)
            pairs.append((u, v, 2 if same else 1))
        G = rg.new_rgraph(6, 2, pairs)
        K = rg.rtype(2, [{2}, {2}], {(0, 1): {1}})
        fit = rg.fit_to_type(G, K, assignment=[0, 0, 0, 1, 1, 1])
        assert fit.cost == 0
        assert rg.edit_distance(fit.graph, G) == 0

    def test_cross_pair_keeps_allowed_value(self):
        K = rg.rtype(3, [{1}, {2}], {(0, 1): {2, 3}})
        kept = rg.fit_to_type(rg.new_rgraph(2, 3, [(0, 1, 3)]), K, assignment=[0, 1])
        assert kept.cost == 0 and kept.graph.color(0, 1) == 3
        moved = rg.fit_to_type(rg.new_rgraph(2, 3, [(0, 1, 1)]), K, assignment=[0, 1])
        assert moved.cost == 1 and moved.graph.color(0, 1) == 2

    def test_directed_fiber_rebuilds_missing_arrows(self):
        K = rg.dirtype(rg.P4, [{"fwd"}], {})
        fit = rg.fit_to_type(mono_digraph(4, "none"), K)
        assert fit.cost == 6
        assert all(
            fit.graph.arc(u, v) == "fwd" for u, v in itertools.combinations(range(4), 2)
        )

    def test_directed_fiber_breaks_cycles(self):
        cyc = rg.new_digraph(3, [(0, 1, "fwd"), (1, 2, "fwd"), (0, 2, "back")])
        K = rg.dirtype(rg.P4, [{"fwd"}], {})
        fit = rg.fit_to_type(cyc, K)
        assert fit.cost == 1
        assert rg.embeds(fit.graph, K)[0]

    def test_index_order_coarseness_documented(self):
        # The one-way fiber is rebuilt along vertex order, so a tournament
        # that is transitive against that order pays for every pair even
        # though it already maps into the template.
        rev = rg.new_digraph(3, [(0, 1, "back"), (0, 2, "back"), (1, 2, "back")])
        K = rg.dirtype(rg.P4, [{"fwd"}], {})
        assert rg.embeds(rev, K)[0]
        assert rg.fit_to_type(rev, K).cost == 3

    def test_existing_single_arrows_kept_on_pairs(self):
        K = rg.dirtype(rg.P0, [{"back"}], {})
        fit = rg.fit_to_type(rg.new_digraph(2, [(0, 1, "fwd")]), K)
        assert fit.cost == 0 and fit.graph.arc(0, 1) == "fwd"

    def test_best_of_is_seeded(self):
        G = mono_rgraph(6, 2, 1)
        K = rg.rtype(2, [{2}, {2}], {(0, 1): {1}})
        a = rg.fit_to_type(G, K, assignment="best_of", trials=8, seed=5)
        b = rg.fit_to_type(G, K, assignment="best_of", trials=8, seed=5)
        assert a.cost == b.cost and a.assignment == b.assignment
        assert rg.edit_distance(G, a.graph) == a.cost

    def test_assignment_guards(self):
        K = rg.rtype(2, [{2}], {})
        with pytest.raises(SizeMismatch):
            rg.fit_to_type(mono_rgraph(5, 2, 1), K, assignment=[0, 0, 0])
        with pytest.raises(RegracutError):
            rg.fit_to_type(mono_rgraph(5, 2, 1), K, assignment=[0, 0, 0, 0, 5])
        with pytest.raises(RegracutError):
            rg.fit_to_type(mono_rgraph(5, 2, 1), K, assignment="weird")
        with pytest.raises(RegracutError):
            rg.fit_to_type(mono_rgraph(5, 2, 1), K, assignment="best_of", trials=0)
        with pytest.raises(KindMismatch):
            rg.fit_to_type(mono_digraph(4, "bi"), K)
        with pytest.raises(KindMismatch):
            rg.fit_to_type(mono_rgraph(4, 3, 1), K)

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_cost_counts_disallowed_pairs(self, data):
        n = data.draw(st.integers(2, 7), label="n")
        G = random_rgraph(data, n)
        k = data.draw(st.integers(1, 3), label="k")
        selfs = [data.draw(st.sampled_from([{1}, {2}])) for _ in range(k)]
        edges = {
            (i, j): data.draw(st.sampled_from([{1}, {2}, {1, 2}]))
            for i, j in itertools.combinations(range(k), 2)
        }
        K = rg.rtype(2, selfs, edges)
        assign = [data.draw(st.integers(0, k - 1)) for _ in range(n)]
        fit = rg.fit_to_type(G, K, assignment=assign)
        expected = sum(
            1
            for u, v in itertools.combinations(range(n), 2)
            if G.color(u, v) not in K.phi(assign[u], assign[v])
        )
        assert fit.cost == expected
        assert rg.edit_distance(G, fit.graph) == fit.cost
        assert _map_conforms(fit.graph, K, tuple(assign), directed=False)


class TestConstructType:
    def setup_method(self):
        pairs = []
        for u, v in itertools.combinations(range(12), 2):
            same = (u < 6) == (v < 6)
            pairs.append((u, v, 2 if same else 1))
        self.G = rg.new_rgraph(12, 2, pairs)
        self.blocks = [list(range(6)), list(range(6, 12))]
        self.efun = rg.EpsilonFunction(table={}, default=0.3)
        self.family = rg.ForbiddenFamily([color_triangle()])

    def test_two_block_construction(self):
        res = rg.construct_type_from_partition(self.G, self.blocks, 0.4, self.efun, self.family)
        assert res.ok and res.failure is None
        K = res.type
        assert [sorted(s) for s in K.self_labels] == [[2], [2]]
        assert sorted(K.phi(0, 1)) == [1]
        assert not rg.embeds(color_triangle(), K)[0]

    def test_exact_certifier_agrees_here(self):
        res = rg.construct_type_from_partition(
            self.G, self.blocks, 0.4, self.efun, self.family, certifier="exact", exact_cap=6
        )
        assert res.ok
        assert [sorted(s) for s in res.type.self_labels] == [[2], [2]]

    def test_unreachable_density_threshold(self):
        res = rg.construct_type_from_partition(self.G, self.blocks, 1.5, self.efun, self.family)
        assert not res.ok
        assert res.failure == "empty_edge_label"
        assert "(0, 1)" in res.detail

    def test_unavoidable_family(self):
        lone = rg.ForbiddenFamily([rg.new_rgraph(1, 2, [])])
        res = rg.construct_type_from_partition(self.G, self.blocks, 0.4, self.efun, lone)
        assert not res.ok
        assert res.failure == "no_valid_vertex_labels"

    def test_directed_blocks(self):
        G = mono_digraph(8, "fwd")
        family = rg.ForbiddenFamily([rg.new_digraph(2, [(0, 1, "bi")])])
        res = rg.construct_type_from_partition(
            G, [list(range(4)), list(range(4, 8))], 0.5, self.efun, family
        )
        assert res.ok
        K = res.type
        assert K.palette.name == "P0"
        assert [sorted(s) for s in K.self_labels] == [["none"], ["none"]]
        assert sorted(K.phi(0, 1)) == ["fwd"]
        assert sorted(K.phi(1, 0)) == ["back"]

    def test_block_validation(self):
        with pytest.raises(OverlappingSets):
            rg.construct_type_from_partition(self.G, [[0, 1], [1, 2]], 0.4, self.efun, self.family)
        with pytest.raises(RegracutError):
            rg.construct_type_from_partition(self.G, [[0, 1], []], 0.4, self.efun, self.family)
        with pytest.raises(KindMismatch):
            rg.construct_type_from_partition(
                mono_digraph(8, "fwd"), [[0, 1], [2, 3]], 0.4, self.efun, self.family
            )
