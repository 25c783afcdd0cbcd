import itertools

import pytest

from ncbv import ribbon


def theta(aligned=True):
    pairs = ([("u1", "v1"), ("u2", "v2"), ("u3", "v3")] if aligned
             else [("u1", "v1"), ("u2", "v3"), ("u3", "v2")])
    return ribbon.StableRibbonGraph(
        [("u", 0, 0, [("u1", "u2", "u3")]),
         ("v", 0, 0, [("v1", "v2", "v3")])], pairs)


def corolla(n=3):
    hs = tuple("h%d" % i for i in range(n))
    return ribbon.StableRibbonGraph([("v", 0, 0, [hs])], [])


def census(max_loop, legs, vf=None, rib=True):
    cs = list(ribbon.enumerate_graphs(max_loop, legs, vertex_filter=vf,
                                      ribbon=rib))
    return len(cs), sum(c.aut_order for c in cs)


CUBIC = lambda s: s[0] == 0 and s[1] == 0 and tuple(s[2]) == (3,)
CUBIC_QUARTIC = lambda s: s[0] == 0 and s[1] == 0 and tuple(s[2]) in ((3,), (4,))


class TestInvariants:
    def test_theta_aligned(self):
        inv = ribbon.graph_invariants(theta(True))
        assert (inv.g, inv.B, inv.b, inv.ell) == (1, 1, 1, 2)

    def test_theta_antialigned(self):
        inv = ribbon.graph_invariants(theta(False))
        assert (inv.g, inv.B, inv.b, inv.ell) == (0, 3, 3, 2)

    def test_theta_automorphisms(self):
        assert len(ribbon.automorphisms(theta(True))) == 6
        assert ribbon.canonicalize(theta(True)).aut_order == 6

    def test_corolla(self):
        inv = ribbon.graph_invariants(corolla())
        assert (inv.g, inv.B, inv.ell) == (0, 1, 0)

    def test_loop_level_formula_on_census(self):
        for ml, legs in [(1, 1), (1, 2), (2, 0), (2, 1)]:
            for ic in ribbon.enumerate_graphs(ml, legs):
                G = ic.canonical
                inv = ribbon.graph_invariants(G)
                assert inv.ell == 2 * inv.g + inv.B - 1
                vert = sum(2 * G.genus_of[v] + G.boundary_of[v]
                           + len(G.cycles[v]) - 1 for v in G.vertices)
                assert inv.ell == inv.betti1 + vert


class TestContraction:
    def test_single_contractions_preserve_invariants(self):
        for ml, legs in [(1, 2), (2, 0), (2, 1)]:
            for ic in ribbon.enumerate_graphs(ml, legs):
                G = ic.canonical
                before = ribbon.graph_invariants(G)
                for e in G.edges():
                    after = ribbon.graph_invariants(ribbon.contract_edge(G, e))
                    assert (after.g, after.B, after.b) == \
                        (before.g, before.B, before.b)

    def test_confluence_up_to_three_edges(self):
        for ml, legs in [(1, 1), (1, 2), (2, 0)]:
            for ic in ribbon.enumerate_graphs(ml, legs):
                G = ic.canonical
                edges = list(G.edges())
                if len(edges) > 3:
                    continue
                results = set()
                for order in itertools.permutations(range(len(edges))):
                    H = G
                    for idx in order:
                        e = next(x for x in H.edges()
                                 if set(x) == set(edges[idx]))
                        H = ribbon.contract_edge(H, e)
                    results.add(ribbon.canonicalize(H).code)
                assert len(results) <= 1


class TestEnumeration:
    @pytest.mark.parametrize("ml,legs,count,autsum", [
        (0, 3, 1, 3), (0, 4, 2, 6), (1, 0, 0, 0), (1, 1, 2, 2),
        (1, 2, 8, 13), (1, 3, 23, 30), (2, 0, 10, 28), (2, 1, 37, 38)])
    def test_ribbon_census(self, ml, legs, count, autsum):
        assert census(ml, legs) == (count, autsum)

    @pytest.mark.parametrize("ml,legs,count,autsum", [
        (1, 2, 5, 16), (2, 1, 18, 57)])
    def test_stable_census(self, ml, legs, count, autsum):
        assert census(ml, legs, rib=False) == (count, autsum)

    @pytest.mark.parametrize("legs,count,autsum", [
        (0, 3, 14), (1, 6, 6), (2, 33, 45)])
    def test_cubic_census(self, legs, count, autsum):
        assert census(2, legs, vf=CUBIC) == (count, autsum)

    @pytest.mark.parametrize("legs,count,autsum", [
        (1, 1, 1), (2, 5, 8), (3, 14, 18), (4, 59, 80)])
    def test_cubic_quartic_census(self, legs, count, autsum):
        assert census(1, legs, vf=CUBIC_QUARTIC) == (count, autsum)

    def test_classes_are_distinct(self):
        codes = [ic.code for ic in ribbon.enumerate_graphs(1, 3)]
        assert len(codes) == len(set(codes))


class TestSerialization:
    def test_json_round_trip(self):
        for G in (theta(True), theta(False), corolla()):
            text = ribbon.graph_to_json(ribbon.canonicalize(G).canonical)
            H = ribbon.graph_from_json(text)
            assert ribbon.graph_to_json(ribbon.canonicalize(H).canonical) \
                == text

    def test_dot_mentions_all_edges(self):
        dot = ribbon.graph_to_dot(theta(True))
        assert dot.count(" -- ") == 3

    def test_unstable_vertex_rejected(self):
        G = ribbon.StableRibbonGraph([("v", 0, 0, [("a", "b")])], [])
        assert ribbon.validate_graph(G)
