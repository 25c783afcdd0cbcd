"""Stable (ribbon) graphs: data structures, contraction, invariants,
canonical forms and constrained enumeration up to isomorphism.

A stable ribbon graph is a finite set of half-edges together with an
incidence map onto vertices, an involution whose fixed points are legs,
a partition of each vertex's half-edges into cyclically ordered cycles,
and nonnegative genus/boundary labels at each vertex.  A stable graph
drops the cyclic structure and keeps a single loop number per vertex.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
import json

_BIG = 1 << 30


def _as_edge(e):
    e = tuple(sorted(e))
    if len(e) != 2:
        raise ValueError("edge must consist of two half-edges: %r" % (e,))
    return e


class StableRibbonGraph:
    """Immutable stable ribbon graph.

    Construct from a list of vertex descriptions ``(vid, genus, boundary,
    cycles)`` where ``cycles`` is a sequence of cyclically ordered
    half-edge sequences, plus a list of half-edge ``pairs`` forming the
    edges.  Half-edges absent from ``pairs`` are legs.
    """

    __slots__ = ("vertices", "half_edges", "vertex_of", "involution",
                 "cycles", "genus_of", "boundary_of", "_succ")

    def __init__(self, vertices, pairs):
        vertex_of = {}
        cycles = {}
        genus_of = {}
        boundary_of = {}
        vids = []
        for vid, g, b, cycs in vertices:
            if vid in cycles:
                raise ValueError("duplicate vertex id %r" % (vid,))
            vids.append(vid)
            genus_of[vid] = int(g)
            boundary_of[vid] = int(b)
            cycs = tuple(tuple(c) for c in cycs)
            cycles[vid] = cycs
            for c in cycs:
                for h in c:
                    if h in vertex_of:
                        raise ValueError("half-edge %r used twice" % (h,))
                    vertex_of[h] = vid
        involution = {h: h for h in vertex_of}
        for pair in pairs:
            a, b2 = _as_edge(pair)
            if a not in vertex_of or b2 not in vertex_of:
                raise ValueError("pair %r mentions unknown half-edge" % (pair,))
            if involution[a] != a or involution[b2] != b2:
                raise ValueError("half-edge in more than one pair: %r" % (pair,))
            involution[a] = b2
            involution[b2] = a
        self.vertices = tuple(vids)
        self.half_edges = tuple(sorted(vertex_of, key=str))
        self.vertex_of = vertex_of
        self.involution = involution
        self.cycles = cycles
        self.genus_of = genus_of
        self.boundary_of = boundary_of
        succ = {}
        for v in vids:
            for c in cycles[v]:
                for i, h in enumerate(c):
                    succ[h] = c[(i + 1) % len(c)]
        self._succ = succ

    # -- basic structure -------------------------------------------------

    def successor(self, h):
        """The permutation c: next half-edge in its vertex cycle."""
        return self._succ[h]

    def legs(self):
        return tuple(h for h in self.half_edges if self.involution[h] == h)

    def edges(self):
        out = []
        for h in self.half_edges:
            k = self.involution[h]
            if k != h and str(h) < str(k):
                out.append((h, k))
        return tuple(out)

    def loop_number(self, v):
        return 2 * self.genus_of[v] + self.boundary_of[v] + len(self.cycles[v]) - 1

    def vertex_shape(self, v):
        return (self.genus_of[v], self.boundary_of[v],
                tuple(sorted((len(c) for c in self.cycles[v]), reverse=True)))

    def is_connected(self):
        if not self.vertices:
            return False
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        adj = {v: set() for v in self.vertices}
        for a, b in self.edges():
            adj[self.vertex_of[a]].add(self.vertex_of[b])
            adj[self.vertex_of[b]].add(self.vertex_of[a])
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def __repr__(self):
        vs = ", ".join("%s(g=%d,b=%d)%r" % (v, self.genus_of[v],
                                            self.boundary_of[v], self.cycles[v])
                       for v in self.vertices)
        return "StableRibbonGraph(%s; edges=%r)" % (vs, self.edges())


class StableGraph:
    """Stable graph: no cyclic structure, one loop number per vertex."""

    __slots__ = ("vertices", "half_edges", "vertex_of", "involution", "loop_of")

    def __init__(self, vertices, pairs):
        vertex_of = {}
        loop_of = {}
        vids = []
        for vid, l, hs in vertices:
            if vid in loop_of:
                raise ValueError("duplicate vertex id %r" % (vid,))
            vids.append(vid)
            loop_of[vid] = int(l)
            for h in hs:
                if h in vertex_of:
                    raise ValueError("half-edge %r used twice" % (h,))
                vertex_of[h] = vid
        involution = {h: h for h in vertex_of}
        for pair in pairs:
            a, b = _as_edge(pair)
            if involution[a] != a or involution[b] != b:
                raise ValueError("half-edge in more than one pair")
            involution[a] = b
            involution[b] = a
        self.vertices = tuple(vids)
        self.half_edges = tuple(sorted(vertex_of, key=str))
        self.vertex_of = vertex_of
        self.involution = involution
        self.loop_of = loop_of

    def legs(self):
        return tuple(h for h in self.half_edges if self.involution[h] == h)

    def edges(self):
        out = []
        for h in self.half_edges:
            k = self.involution[h]
            if k != h and str(h) < str(k):
                out.append((h, k))
        return tuple(out)

    def loop_number(self, v):
        return self.loop_of[v]

    def incident(self, v):
        return tuple(h for h in self.half_edges if self.vertex_of[h] == v)

    def is_connected(self):
        if not self.vertices:
            return False
        adj = {v: set() for v in self.vertices}
        for a, b in self.edges():
            adj[self.vertex_of[a]].add(self.vertex_of[b])
            adj[self.vertex_of[b]].add(self.vertex_of[a])
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def __repr__(self):
        vs = ", ".join("%s(l=%d)%r" % (v, self.loop_of[v], self.incident(v))
                       for v in self.vertices)
        return "StableGraph(%s; edges=%r)" % (vs, self.edges())


@dataclass(frozen=True)
class GraphInvariants:
    beta_cycles: int
    B: int
    g: int
    b: int
    ell: int
    betti1: int
    separating_edges: tuple
    p_tree_level: object = None


@dataclass(frozen=True)
class IsoClass:
    canonical: object
    aut_order: int
    code: tuple = field(compare=False, default=())


# -- validation ----------------------------------------------------------

def validate_graph(G):
    """Return a list of human-readable invariant violations (empty if valid)."""
    errs = []
    if isinstance(G, StableGraph):
        for v in G.vertices:
            val = len(G.incident(v))
            if 2 * G.loop_of[v] + val < 3:
                errs.append("vertex %r: 2l+|v|=%d<3" % (v, 2 * G.loop_of[v] + val))
        return errs
    for h in G.half_edges:
        if G.involution[G.involution[h]] != h:
            errs.append("involution not self-inverse at %r" % (h,))
    for v in G.vertices:
        hs = [h for c in G.cycles[v] for h in c]
        if len(hs) != len(set(hs)):
            errs.append("vertex %r: cycles overlap" % (v,))
        incident = {h for h in G.half_edges if G.vertex_of[h] == v}
        if set(hs) != incident:
            errs.append("vertex %r: cycles do not partition incident half-edges" % (v,))
        if any(len(c) == 0 for c in G.cycles[v]):
            errs.append("vertex %r: empty cycle" % (v,))
        if len(G.cycles[v]) + G.boundary_of[v] <= 0:
            errs.append("vertex %r: |C(v)|+b(v)=0" % (v,))
        val = len(hs)
        l = G.loop_number(v)
        if 2 * l + val < 3:
            errs.append("vertex %r: 2l+|v|=%d<3" % (v, 2 * l + val))
    return errs


# -- contraction ---------------------------------------------------------

def _fresh_vid(G):
    i = 0
    while ("w%d" % i) in G.vertices:
        i += 1
    return "w%d" % i


def _rotate_to(cycle, h):
    i = cycle.index(h)
    return cycle[i:] + cycle[:i]


def contract_edge(G, e):
    """Contract the edge e = {h1, h2}; returns a new graph.

    For distinct endpoint vertices the two cycles through the edge are
    spliced and genus/boundary labels add.  A loop across two cycles of a
    single vertex splices them and raises the genus; a loop inside one
    cycle splits it in two.  Whenever a splice or split would create an
    empty cycle, that cycle is dropped and the boundary label increases
    instead (by two when a split produces two empty cycles).
    """
    h1, h2 = _as_edge(e)
    if isinstance(G, StableGraph):
        return _contract_edge_stable(G, h1, h2)
    if G.involution.get(h1) != h2 or h1 == h2:
        raise ValueError("not an edge: %r" % (e,))
    u, v = G.vertex_of[h1], G.vertex_of[h2]
    pairs = [p for p in G.edges() if set(p) != {h1, h2}]

    def cycle_of(vid, h):
        for c in G.cycles[vid]:
            if h in c:
                return c
        raise AssertionError

    if u != v:
        c1 = cycle_of(u, h1)
        c2 = cycle_of(v, h2)
        spliced = _rotate_to(c1, h1)[1:] + _rotate_to(c2, h2)[1:]
        new_cycles = [c for c in G.cycles[u] if c != c1]
        new_cycles += [c for c in G.cycles[v] if c != c2]
        g = G.genus_of[u] + G.genus_of[v]
        b = G.boundary_of[u] + G.boundary_of[v]
        if spliced:
            new_cycles.append(spliced)
        else:
            b += 1
        wid = _fresh_vid(G)
        verts = [(w, G.genus_of[w], G.boundary_of[w], G.cycles[w])
                 for w in G.vertices if w not in (u, v)]
        verts.append((wid, g, b, new_cycles))
        return StableRibbonGraph(verts, pairs)

    c1 = cycle_of(u, h1)
    c2 = cycle_of(u, h2)
    g = G.genus_of[u]
    b = G.boundary_of[u]
    if c1 != c2:
        # loop joining two distinct cycles: splice, genus rises by one
        r1 = _rotate_to(c1, h1)
        r2 = _rotate_to(c2, h2)
        spliced = r1[1:] + r2[1:]
        new_cycles = [c for c in G.cycles[u] if c not in (c1, c2)]
        g += 1
        if spliced:
            new_cycles.append(spliced)
        else:
            b += 1
    else:
        # loop inside a single cycle: split it at the two half-edges
        r = _rotate_to(c1, h1)
        j = r.index(h2)
        side1 = r[1:j]
        side2 = r[j + 1:]
        new_cycles = [c for c in G.cycles[u] if c != c1]
        for side in (side1, side2):
            if side:
                new_cycles.append(side)
            else:
                b += 1
    wid = _fresh_vid(G)
    verts = [(w, G.genus_of[w], G.boundary_of[w], G.cycles[w])
             for w in G.vertices if w != u]
    verts.append((wid, g, b, new_cycles))
    return StableRibbonGraph(verts, pairs)


def _contract_edge_stable(G, h1, h2):
    if G.involution.get(h1) != h2 or h1 == h2:
        raise ValueError("not an edge: %r" % ((h1, h2),))
    u, v = G.vertex_of[h1], G.vertex_of[h2]
    pairs = [p for p in G.edges() if set(p) != {h1, h2}]
    keep = lambda w: [h for h in G.incident(w) if h not in (h1, h2)]
    if u != v:
        wid = _fresh_vid(G)
        verts = [(w, G.loop_of[w], G.incident(w))
                 for w in G.vertices if w not in (u, v)]
        verts.append((wid, G.loop_of[u] + G.loop_of[v], keep(u) + keep(v)))
    else:
        wid = _fresh_vid(G)
        verts = [(w, G.loop_of[w], G.incident(w)) for w in G.vertices if w != u]
        verts.append((wid, G.loop_of[u] + 1, keep(u)))
    return StableGraph(verts, pairs)


# -- invariants ----------------------------------------------------------

def _permutation_cycle_count(perm, support):
    seen = set()
    count = 0
    for h in support:
        if h in seen:
            continue
        count += 1
        x = h
        while x not in seen:
            seen.add(x)
            x = perm[x]
    return count


def _separating_edges(G):
    out = []
    for e in G.edges():
        verts = set(G.vertices)
        adj = {v: set() for v in verts}
        for a, b in G.edges():
            if (a, b) == e:
                continue
            adj[G.vertex_of[a]].add(G.vertex_of[b])
            adj[G.vertex_of[b]].add(G.vertex_of[a])
        start = next(iter(verts))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(verts):
            out.append(e)
    return tuple(out)


def graph_invariants(G):
    """Topological invariants of a connected stable (ribbon) graph."""
    if not G.is_connected():
        raise ValueError("graph is not connected")
    nE = len(G.edges())
    nV = len(G.vertices)
    betti1 = nE - nV + 1
    loops = [G.loop_number(v) for v in G.vertices]
    ell = betti1 + sum(loops)
    heavy = [l for l in loops if l > 0]
    p_tree = None
    if betti1 == 0 and len(heavy) <= 1:
        p_tree = heavy[0] if heavy else 0
    if isinstance(G, StableGraph):
        return GraphInvariants(beta_cycles=None, B=None, g=None, b=None,
                               ell=ell, betti1=betti1,
                               separating_edges=_separating_edges(G),
                               p_tree_level=p_tree)
    beta = {h: G.successor(G.involution[h]) for h in G.half_edges}
    beta_cycles = _permutation_cycle_count(beta, G.half_edges)
    nC = sum(len(G.cycles[v]) for v in G.vertices)
    g2 = 2 * (1 - nV) + (nE + nC - beta_cycles) + 2 * sum(G.genus_of.values())
    assert g2 % 2 == 0
    g = g2 // 2
    B = beta_cycles + sum(G.boundary_of.values())
    legdec, _ = canonical_leg_decomposition(G)
    b = B - len(legdec)
    assert ell == 2 * g + B - 1
    return GraphInvariants(beta_cycles=beta_cycles, B=B, g=g, b=b, ell=ell,
                           betti1=betti1,
                           separating_edges=_separating_edges(G),
                           p_tree_level=p_tree)


def canonical_leg_decomposition(G):
    """Cyclic decomposition of the legs, read from the corolla G/G.

    Returns (cycles of the fully contracted corolla, the corolla itself).
    """
    if not G.is_connected():
        raise ValueError("graph is not connected")
    H = G
    while H.edges():
        H = contract_edge(H, H.edges()[0])
    v = H.vertices[0]
    return H.cycles[v], H


# -- canonical forms -----------------------------------------------------

def _arrangements(cycles):
    """All (ordering, rotation) choices for a vertex's cycles."""
    for perm in permutations(range(len(cycles))):
        def rots(idx):
            c = cycles[perm[idx]]
            return [c[i:] + c[:i] for i in range(len(c))]
        stack = [[]]
        for idx in range(len(cycles)):
            stack = [pre + [r] for pre in stack for r in rots(idx)]
        for choice in stack:
            yield choice


def _vertex_key_ribbon(G, v):
    # flat integer tuple so that codes compare element-wise
    nlegs = sum(1 for c in G.cycles[v] for h in c if G.involution[h] == h)
    lens = sorted(len(c) for c in G.cycles[v])
    return (G.genus_of[v], G.boundary_of[v], len(lens), *lens, nlegs)


def canonicalize(G):
    """Deterministic canonical form and automorphism count.

    The canonical form minimizes a code over all layouts (vertex order,
    cycle order, cycle rotations for ribbon graphs; half-edge order
    inside a vertex for stable graphs); the number of minimizing layouts
    equals the order of the automorphism group.
    """
    ribbon = isinstance(G, StableRibbonGraph)
    verts = list(G.vertices)
    nverts = len(verts)
    vindex = {v: i for i, v in enumerate(verts)}
    halves = list(G.half_edges)
    n = len(halves)
    hidx = {h: i for i, h in enumerate(halves)}
    inv_arr = [hidx[G.involution[h]] for h in halves]
    vadj = [set() for _ in range(nverts)]
    for a, b in G.edges():
        va, vb = vindex[G.vertex_of[a]], vindex[G.vertex_of[b]]
        vadj[va].add(vb)
        vadj[vb].add(va)
    vadj = [sorted(s) for s in vadj]

    if ribbon:
        vkey = [_vertex_key_ribbon(G, v) for v in verts]
    else:
        vkey = [(G.loop_of[v], len(G.incident(v))) for v in verts]

    best = {"code": None, "labelings": [], "ver": 0}

    def layouts(v):
        if ribbon:
            cycs = [[hidx[h] for h in c] for c in G.cycles[v]]
            return list(_arrangements(cycs))
        inc = [hidx[h] for h in G.incident(v)]
        return [[list(perm)] if perm else [] for perm in permutations(inc)]

    layout_cache = [layouts(v) for v in verts]
    num = [-1] * n

    def segment(vi, arr, counter):
        seg = list(vkey[vi])
        push = seg.append
        newnum = []
        c = counter
        for cyc in arr:
            push(len(cyc))
            for h in cyc:
                num[h] = c
                newnum.append(h)
                k = inv_arr[h]
                if k == h:
                    push(-1)
                else:
                    nk = num[k]
                    push(_BIG if nk < 0 else nk)
                c += 1
        return seg, newnum, c

    placed = [False] * nverts

    def rec(nplaced, counter, codelen, code, tight, vorder):
        if nplaced == nverts:
            t = tuple(code)
            if best["code"] is None or t < best["code"]:
                best["code"] = t
                best["labelings"] = [(list(num), list(vorder))]
                best["ver"] += 1
            elif t == best["code"]:
                best["labelings"].append((list(num), list(vorder)))
            return
        frontier = [v for v in range(nverts) if not placed[v] and
                    any(placed[w] for w in vadj[v])]
        if not frontier:
            frontier = [v for v in range(nverts) if not placed[v]]
        # only a vertex of minimal key can extend a minimal code, since
        # every segment begins with the vertex key
        mk = min(vkey[v] for v in frontier)
        bc = best["code"]
        for v in frontier:
            if vkey[v] != mk:
                continue
            for arr in layout_cache[v]:
                seg, newnum, c2 = segment(v, arr, counter)
                tight2 = tight
                if tight and bc is not None:
                    ts = tuple(seg)
                    if ts > bc[codelen:codelen + len(seg)]:
                        for h in newnum:
                            num[h] = -1
                        continue
                    tight2 = ts == bc[codelen:codelen + len(seg)]
                placed[v] = True
                vorder.append(v)
                code.extend(seg)
                ver = best["ver"]
                rec(nplaced + 1, c2, codelen + len(seg), code, tight2, vorder)
                if best["ver"] != ver:
                    bc = best["code"]
                    if not tight2:
                        # best was replaced inside this subtree, so the
                        # current code is now a prefix of it
                        tight = True
                del code[codelen:]
                vorder.pop()
                placed[v] = False
                for h in newnum:
                    num[h] = -1

    if verts:
        rec(0, 0, 0, [], True, [])
    else:
        best["code"] = ()
        best["labelings"] = [([], [])]

    num_arr, vorder_idx = best["labelings"][0]
    numbering = {halves[i]: num_arr[i] for i in range(n)}
    vorder = [verts[i] for i in vorder_idx]
    relab = {h: "h%d" % numbering[h] for h in numbering}
    vmap = {v: "v%d" % i for i, v in enumerate(vorder)}
    pairs = [(relab[a], relab[b]) for a, b in G.edges()]
    if ribbon:
        verts_out = []
        for v in vorder:
            cycs = []
            for c in G.cycles[v]:
                nums = [numbering[h] for h in c]
                i = nums.index(min(nums))
                cycs.append(tuple("h%d" % x for x in nums[i:] + nums[:i]))
            cycs.sort(key=lambda c: int(c[0][1:]))
            verts_out.append((vmap[v], G.genus_of[v], G.boundary_of[v], cycs))
        canon = StableRibbonGraph(verts_out, pairs)
    else:
        verts_out = []
        for v in vorder:
            hs = sorted(G.incident(v), key=lambda h: numbering[h])
            verts_out.append((vmap[v], G.loop_of[v], ["h%d" % numbering[h] for h in hs]))
        canon = StableGraph(verts_out, pairs)
    return IsoClass(canonical=canon, aut_order=len(best["labelings"]),
                    code=best["code"])


def automorphisms(G):
    """All automorphisms as (vertex map, half-edge map) pairs."""
    ribbon = isinstance(G, StableRibbonGraph)
    ic = canonicalize(G)
    # recompute all minimizing labelings: canonicalize already did, but we
    # need them; rerun the search on G and compose with the first labeling.
    labelings = _all_min_labelings(G)
    base_num, base_vorder = labelings[0]
    inv_num = {}
    for h, i in base_num.items():
        inv_num[i] = h
    inv_v = {i: v for i, v in enumerate(base_vorder)}
    out = []
    for num, vorder in labelings:
        hmap = {h: inv_num[num[h]] for h in num}
        vm = {v: inv_v[i] for i, v in enumerate(vorder)}
        out.append((vm, hmap))
    assert len(out) == ic.aut_order
    return out


def _all_min_labelings(G):
    # canonicalize keeps all minimizing labelings; expose them
    ic_search = _CanonSearch(G)
    return ic_search.labelings


class _CanonSearch:
    def __init__(self, G):
        ic = canonicalize(G)
        # rerun by calling canonicalize's machinery indirectly: repeat search
        self.labelings = _search_labelings(G, ic.code)


def _search_labelings(G, target_code):
    """All layouts of G achieving the given canonical code."""
    ribbon = isinstance(G, StableRibbonGraph)
    verts = list(G.vertices)
    vadj = {v: set() for v in verts}
    for a, b in G.edges():
        vadj[G.vertex_of[a]].add(G.vertex_of[b])
        vadj[G.vertex_of[b]].add(G.vertex_of[a])
    if ribbon:
        vkey = {v: _vertex_key_ribbon(G, v) for v in verts}
    else:
        vkey = {v: (G.loop_of[v], len(G.incident(v))) for v in verts}
    results = []

    def layouts(v):
        if ribbon:
            yield from _arrangements(G.cycles[v])
        else:
            for perm in permutations(G.incident(v)):
                yield [perm] if perm else []

    def segment(v, arr, numbering, counter):
        seg = list(vkey[v])
        newnum = {}
        c = counter
        for cyc in arr:
            seg.append(len(cyc))
            for h in cyc:
                newnum[h] = c
                k = G.involution[h]
                if k == h:
                    seg.append(-1)
                elif k in numbering:
                    seg.append(numbering[k])
                elif k in newnum:
                    seg.append(newnum[k])
                else:
                    seg.append(_BIG)
                c += 1
        return seg, newnum, c

    def rec(placed, numbering, counter, code, vorder):
        if len(placed) == len(verts):
            if tuple(code) == target_code:
                results.append((dict(numbering), list(vorder)))
            return
        frontier = sorted((v for v in verts if v not in placed and
                           any(w in placed for w in vadj[v])), key=str)
        if not frontier:
            frontier = sorted((v for v in verts if v not in placed), key=str)
            if placed:
                mk = min(vkey[v] for v in frontier)
                frontier = [v for v in frontier if vkey[v] == mk]
        for v in frontier:
            for arr in layouts(v):
                seg, newnum, c2 = segment(v, arr, numbering, counter)
                code2 = code + seg
                if tuple(code2) != target_code[:len(code2)]:
                    continue
                numbering.update(newnum)
                placed.add(v)
                vorder.append(v)
                rec(placed, numbering, c2, code2, vorder)
                vorder.pop()
                placed.discard(v)
                for h in newnum:
                    del numbering[h]

    if verts:
        rec(set(), {}, 0, [], [])
    else:
        results.append(({}, []))
    return results


# -- enumeration ---------------------------------------------------------

def _cycle_length_partitions(total):
    """Partitions of `total` into positive parts (weakly decreasing)."""
    if total == 0:
        yield ()
        return

    def rec(rem, maxpart):
        if rem == 0:
            yield ()
            return
        for p in range(min(rem, maxpart), 0, -1):
            for rest in rec(rem - p, p):
                yield (p,) + rest
    yield from rec(total, total)


def _ribbon_shapes(size, max_l):
    """All stable vertex shapes (g, b, cycle lengths) of given size with
    loop number at most max_l."""
    out = []
    for part in _cycle_length_partitions(size):
        k = len(part)
        for g in range(0, max_l // 2 + 1):
            for b in range(0, max_l + 1):
                l = 2 * g + b + k - 1
                if l < 0 or l > max_l:
                    continue
                if k + b <= 0:
                    continue
                if 2 * l + size < 3:
                    continue
                out.append((g, b, part))
    return out


def _multisets(options, count, size_of, loop_of, total_size, loop_budget):
    """Weakly increasing `count`-tuples over the sorted options with the
    exact total size and loop numbers summing to at most loop_budget."""
    options = sorted(options, key=lambda o: (size_of(o), o))

    def rec(start, k, size_left, loops_left):
        if k == 0:
            if size_left == 0:
                yield ()
            return
        for i in range(start, len(options)):
            s = size_of(options[i])
            l = loop_of(options[i])
            if s * k > size_left or l > loops_left:
                continue
            for rest in rec(i, k - 1, size_left - s, loops_left - l):
                yield (options[i],) + rest
    yield from rec(0, count, total_size, loop_budget)


def _involutions_with_legs(n, nlegs, layout=None):
    """Involutions on range(n) with exactly nlegs fixed points, as pair
    lists (fixed points appear as (a, a)).

    layout describes the half-edge arrangement as a list of vertex blocks
    (shape_key, kind, cycles) with kind "rot" (cyclic symmetry per cycle,
    swaps of equal cycles, swaps of equal-shape blocks) or "sym" (full
    symmetric group inside the block).  Partner choices are reduced to
    representatives of the evident symmetry classes of the untouched part
    of the layout; every isomorphism class still appears.
    """
    if layout is None:
        layout = [(("all",), "sym", [list(range(n))])]
    block_of = {}
    cycle_of = {}
    for vi, (_, kind, cycles) in enumerate(layout):
        for ci, cyc in enumerate(cycles):
            for p in cyc:
                block_of[p] = vi
                cycle_of[p] = ci
    nblocks = len(layout)

    # union-find over vertex blocks, tracking unassigned points per
    # component; a finished component that misses some block is a dead end
    parent = list(range(nblocks))
    free = [sum(len(c) for c in cycles) for _, _, cycles in layout]
    weight = free[:]

    def find(x):
        # no path compression: unions are undone on backtrack
        while parent[x] != x:
            x = parent[x]
        return x

    def rec(avail, legs_left, assigned):
        if not avail:
            if legs_left == 0:
                yield []
            return
        a = avail[0]
        rest = avail[1:]
        assigned_a = assigned | {a}
        options = []
        if legs_left > 0:
            options.append(a)
        options.extend(rest)
        seen = set()
        va = find(block_of[a])
        for b in options:
            if b == a:
                key = ("leg",)
            else:
                vb = block_of[b]
                skey, kind, cycles = layout[vb]
                cyc = cycles[cycle_of[b]]
                if not any(p in assigned_a for c in cycles for p in c):
                    key = ("vert", skey, kind, len(cyc))
                elif kind == "sym":
                    key = ("blk", vb)
                elif not any(p in assigned_a for p in cyc):
                    key = ("cyc", vb, len(cyc))
                else:
                    key = ("pt", b)
            if key in seen:
                continue
            seen.add(key)
            if b == a:
                free[va] -= 1
                if free[va] > 0 or weight[va] == n:
                    for tail in rec(rest, legs_left - 1, assigned_a):
                        yield [(a, a)] + tail
                free[va] += 1
            else:
                rb = find(block_of[b])
                if rb == va:
                    free[va] -= 2
                    if free[va] > 0 or weight[va] == n:
                        rem = [x for x in rest if x != b]
                        for tail in rec(rem, legs_left, assigned_a | {b}):
                            yield [(a, b)] + tail
                    free[va] += 2
                else:
                    parent[rb] = va
                    fa, fb = free[va], free[rb]
                    wa = weight[va]
                    free[va] = fa + fb - 2
                    weight[va] = wa + weight[rb]
                    if free[va] > 0 or weight[va] == n:
                        rem = [x for x in rest if x != b]
                        for tail in rec(rem, legs_left, assigned_a | {b}):
                            yield [(a, b)] + tail
                    parent[rb] = rb
                    free[va], free[rb] = fa, fb
                    weight[va] = wa
    yield from rec(list(range(n)), nlegs, frozenset())


def enumerate_graphs(max_loop, legs, vertex_filter=None, ribbon=True,
                     extra_shapes=None):
    """Yield every isomorphism class of connected stable (ribbon) graphs
    with total loop number at most max_loop and the given number of legs,
    exactly once, in a deterministic order.

    vertex_filter receives (genus, boundary, cycle_lengths) for ribbon
    graphs and (loop, size) for stable graphs.  When extra_shapes is
    given, exactly one vertex carries a shape from that list instead; its
    shape is exempt from the stability requirement.
    """
    classes = {}
    V_max = max(1, 4 * max_loop + legs - 2)
    for nV in range(1, V_max + 1):
        for nE in range(max(0, nV - 1), nV - 1 + max_loop + 1):
            b1 = nE - nV + 1
            if b1 < 0 or b1 > max_loop:
                continue
            n = 2 * nE + legs
            if nV >= 2 and n < nV:
                continue
            budget = max_loop - b1
            if ribbon:
                shapes = []
                for size in range(0, n + 1):
                    if size == 0 and nV > 1:
                        continue
                    shapes.extend(_ribbon_shapes(size, budget))
            else:
                shapes = []
                for size in range(0, n + 1):
                    if size == 0 and nV > 1:
                        continue
                    for l in range(0, budget + 1):
                        if 2 * l + size >= 3:
                            shapes.append((l, size))
            if vertex_filter is not None:
                shapes = [s for s in shapes if vertex_filter(s)]
            if ribbon:
                size_of = lambda s: sum(s[2])
                loop_of = lambda s: 2 * s[0] + s[1] + len(s[2]) - 1
            else:
                size_of = lambda s: s[1]
                loop_of = lambda s: s[0]
            if extra_shapes is None:
                if not shapes:
                    continue
                profiles = _multisets(shapes, nV, size_of, loop_of, n, budget)
            else:
                profiles = []
                for es in extra_shapes:
                    se, le = size_of(es), loop_of(es)
                    if le > budget or se > n:
                        continue
                    if se == 0 and nV > 1:
                        continue
                    if nV == 1:
                        if se == n:
                            profiles.append((es,))
                        continue
                    for rest in _multisets(shapes, nV - 1, size_of, loop_of,
                                           n - se, budget - le):
                        profiles.append(rest + (es,))
            for profile in profiles:
                for G in _profile_graphs(profile, nE, legs, ribbon):
                    if not G.is_connected():
                        continue
                    ic = canonicalize(G)
                    key = ic.code
                    if key not in classes:
                        inv = graph_invariants(ic.canonical)
                        classes[key] = (inv.ell, nV, nE, key, ic)
    for _, _, _, _, ic in sorted(classes.values(), key=lambda t: t[:4]):
        yield ic


def _profile_graphs(profile, nE, legs, ribbon):
    """Labelled graphs realizing a fixed multiset of vertex shapes."""
    verts = []
    pos = 0
    positions = []
    for i, shape in enumerate(profile):
        vid = "v%d" % i
        if ribbon:
            g, b, part = shape
            cycs = []
            for ln in part:
                cycs.append(tuple("h%d" % j for j in range(pos, pos + ln)))
                positions.extend(range(pos, pos + ln))
                pos += ln
            verts.append((vid, g, b, cycs))
        else:
            l, size = shape
            hs = ["h%d" % j for j in range(pos, pos + size)]
            positions.extend(range(pos, pos + size))
            pos += size
            verts.append((vid, l, hs))
    n = pos
    layout = []
    pos2 = 0
    for shape in profile:
        if ribbon:
            cycles = []
            for ln in shape[2]:
                cycles.append(list(range(pos2, pos2 + ln)))
                pos2 += ln
            layout.append((shape, "rot", cycles))
        else:
            size = shape[1]
            layout.append((shape, "sym", [list(range(pos2, pos2 + size))]))
            pos2 += size
    for pairing in _involutions_with_legs(n, legs, layout):
        pairs = [("h%d" % a, "h%d" % b) for a, b in pairing if a != b]
        if len(pairs) != nE:
            continue
        if ribbon:
            yield StableRibbonGraph(verts, pairs)
        else:
            yield StableGraph(verts, pairs)


# -- serialization -------------------------------------------------------

def graph_to_json(G):
    """JSON text for a stable ribbon graph."""
    data = {
        "half_edges": [str(h) for h in G.half_edges],
        "vertices": [
            {"id": str(v), "genus": G.genus_of[v], "boundary": G.boundary_of[v],
             "cycles": [[str(h) for h in c] for c in G.cycles[v]]}
            for v in G.vertices
        ],
        "pairs": [[str(a), str(b)] for a, b in G.edges()],
    }
    return json.dumps(data, sort_keys=True)


def graph_from_json(text):
    data = json.loads(text)
    verts = [(v["id"], v["genus"], v["boundary"], [tuple(c) for c in v["cycles"]])
             for v in data["vertices"]]
    return StableRibbonGraph(verts, [tuple(p) for p in data["pairs"]])


def graph_to_dot(G):
    """DOT text; vertices annotated with (g,b), ports follow cyclic order."""
    lines = ["graph G {"]
    for v in G.vertices:
        cyc = " | ".join(",".join(str(h) for h in c) for c in G.cycles[v])
        lines.append('  "%s" [label="%s g=%d,b=%d [%s]"];'
                     % (v, v, G.genus_of[v], G.boundary_of[v], cyc))
    for a, b in G.edges():
        lines.append('  "%s" -- "%s" [label="%s-%s"];'
                     % (G.vertex_of[a], G.vertex_of[b], a, b))
    for h in G.legs():
        lines.append('  "leg_%s" [shape=point];' % (h,))
        lines.append('  "%s" -- "leg_%s" [style=dashed,label="%s"];'
                     % (G.vertex_of[h], h, h))
    lines.append("}")
    return "\n".join(lines)
