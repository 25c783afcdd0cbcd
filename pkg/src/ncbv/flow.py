"""Feynman weights on stable (ribbon) graphs and the graph-sum flow.

A functional term gamma^i nu^j (w_1 .. w_k) is attached to a graph
vertex of genus i, boundary j and k cycles whose lengths match the word
lengths; edges contract pairs of letters against a symmetric kernel
using the same per-position splice rules and Koszul signs as the BV
operations, and the flow weighs each isomorphism class by
gamma^{g} nu^{b} / |Aut|.  Spliced-away empty cycles are not tracked by
the weight; they are part of the graph's global boundary count.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product

from .tensor import (NCFunctional, CommFunctional, perm_sign, rotation_sign,
                     word_parity)
from . import bv
from .ribbon import enumerate_graphs, graph_invariants


@dataclass(frozen=True)
class Truncation:
    """Filtration and tensor-order bounds for graph sums."""
    p_max: int
    l_max: int

    def __post_init__(self):
        if self.p_max < 0 or self.l_max < 0:
            raise ValueError("truncation bounds must be nonnegative")


@dataclass
class Decoration:
    """Distinguished structure on a graph: a marked edge contracted with
    an auxiliary kernel, or a marked vertex carrying a second functional."""
    kind: str = "none"
    edge: tuple = None
    vertex: object = None
    J: object = None
    K: object = None

    def __post_init__(self):
        if self.kind not in ("none", "edge", "vertex"):
            raise ValueError("unknown decoration kind %r" % (self.kind,))
        if self.kind == "edge" and (self.edge is None or self.K is None):
            raise ValueError("edge decoration needs edge and kernel")
        if self.kind == "vertex" and (self.vertex is None or self.J is None):
            raise ValueError("vertex decoration needs vertex and functional")


# -- vertex attachments --------------------------------------------------------

def _attachments(G, v, F):
    """All placements of F's matching components on the cycles of v, as
    (labelled words, coefficient); a labelled letter is (letter, half-edge)."""
    basis = F.basis
    cycles = G.cycles[v]
    k = len(cycles)
    lens = tuple(sorted((len(c) for c in cycles), reverse=True))
    shape = (G.genus_of[v], G.boundary_of[v])
    out = []
    for (i, j, ws), c in F.terms.items():
        if (i, j) != shape or len(ws) != k:
            continue
        if tuple(sorted((len(w) for w in ws), reverse=True)) != lens:
            continue
        wpars = [word_parity(basis, w) for w in ws]
        for perm in permutations(range(k)):
            if any(len(ws[perm[t]]) != len(cycles[t]) for t in range(k)):
                continue
            psign = perm_sign(wpars, perm)
            ordered = [ws[p] for p in perm]
            for rots in product(*[range(len(w)) for w in ordered]):
                sign = Fraction(psign)
                lw = []
                for t, (w, r) in enumerate(zip(ordered, rots)):
                    sign *= rotation_sign(basis.parities(w), r)
                    rw = w[r:] + w[:r]
                    lw.append(tuple(zip(rw, cycles[t])))
                out.append((lw, c * sign))
    return out


# -- single edge contraction ---------------------------------------------------

def _contract(basis, state, h1, h2, K):
    """Contract the edge {h1, h2} against K in every state term, using the
    positional splice/split signs of the BV operations."""
    kp = K.degree & 1
    out = []
    for ws, c in state:
        pos = {}
        for a, w in enumerate(ws):
            for i, (_, tag) in enumerate(w):
                if tag == h1 or tag == h2:
                    pos[tag] = (a, i)
        a, i0 = pos[h1]
        b, j0 = pos[h2]
        q = [word_parity(basis, tuple(x for x, _ in w)) for w in ws]
        if a == b:
            if i0 > j0:
                i0, j0 = j0, i0
            w = ws[a]
            letters = tuple(x for x, _ in w)
            p = basis.parities(letters)
            kv = K.tensor[letters[i0]][letters[j0]]
            if not kv:
                continue
            coeff = -kv if p[i0] & p[j0] else kv
            e = (((sum(p[:i0 + 1]) & 1) & (sum(p[i0 + 1:]) & 1))
                 ^ (p[j0] & ((sum(p[:i0 + 1]) + sum(p[j0 + 1:])) & 1))
                 ^ (kp & sum(p) & 1)
                 ^ (kp & sum(q[:a]) & 1))
            if e:
                coeff = -coeff
            mid = [x for x in (w[i0 + 1:j0], w[j0 + 1:] + w[:i0]) if x]
            out.append((list(ws[:a]) + mid + list(ws[a + 1:]), c * coeff))
        else:
            if a > b:
                a, b, i0, j0 = b, a, j0, i0
            l1 = tuple(x for x, _ in ws[a])
            l2 = tuple(x for x, _ in ws[b])
            p1 = basis.parities(l1)
            p2 = basis.parities(l2)
            kv = K.tensor[l2[j0]][l1[i0]]
            if not kv:
                continue
            coeff = -kv if p1[i0] & p2[j0] else kv
            e = (((p1[i0] ^ kp) & (sum(p2) & 1)) ^ (kp & sum(p1) & 1)
                 ^ ((sum(p1[:i0 + 1]) & 1) & (sum(p1[i0 + 1:]) & 1))
                 ^ ((sum(p2[:j0 + 1]) & 1) & (sum(p2[j0 + 1:]) & 1))
                 ^ (q[a] & (sum(q[:a]) & 1))
                 ^ (q[b] & ((sum(q[:b]) - q[a]) & 1)))
            if e:
                coeff = -coeff
            word = ws[a][i0 + 1:] + ws[a][:i0] + ws[b][j0 + 1:] + ws[b][:j0]
            rest = [ws[t] for t in range(len(ws)) if t not in (a, b)]
            out.append((([word] if word else []) + rest, c * coeff))
    return out


def feynman_weight(G, I, P, dec=None):
    """The weight w_Gamma(I, P) (or its decorated variant) as a functional
    in the graph's legs; carries no gamma/nu bookkeeping of its own."""
    basis = I.basis
    out = NCFunctional(basis, I.p_max, I.l_max)
    atts = []
    for v in G.vertices:
        F = I
        if dec is not None and dec.kind == "vertex" and v == dec.vertex:
            F = dec.J
        att = _attachments(G, v, F)
        if not att:
            return out
        atts.append(att)
    # attach one vertex at a time and contract an edge as soon as both of
    # its ends are present; later words sit to the right and every sign
    # formula only reads prefix parities, so the result is the same as
    # attaching everything first
    state = [([], Fraction(1))]
    attached = set()
    pending = list(G.edges())
    for v, att in zip(G.vertices, atts):
        state = [(ws1 + ws2, c1 * c2) for ws1, c1 in state for ws2, c2 in att]
        attached.add(v)
        rest = []
        for x, y in pending:
            if G.vertex_of[x] not in attached or G.vertex_of[y] not in attached:
                rest.append((x, y))
                continue
            Ke = P
            if dec is not None and dec.kind == "edge" and set(dec.edge) == {x, y}:
                Ke = dec.K
            if Ke is None:
                return out
            state = _contract(basis, state, x, y, Ke)
            if not state:
                return out
        pending = rest
    for ws, c in state:
        out.add_term(0, 0, [tuple(x for x, _ in w) for w in ws], c)
    return out


# -- graph sums ----------------------------------------------------------------

_GRAPH_CACHE = {}


def _graphs(max_loop, legs, shapes, ribbon=True, extra=None):
    key = (max_loop, legs, frozenset(shapes), ribbon,
           None if extra is None else frozenset(extra))
    if key not in _GRAPH_CACHE:
        _GRAPH_CACHE[key] = list(enumerate_graphs(
            max_loop, legs, vertex_filter=lambda s: s in shapes,
            ribbon=ribbon, extra_shapes=None if extra is None else sorted(extra)))
    return _GRAPH_CACHE[key]


def _check_flowable(I, t):
    if (I.p_max, I.l_max) != (t.p_max, t.l_max):
        raise ValueError("functional truncation differs from the flow truncation")
    core = I.modulo_constants()
    if not core.is_interaction():
        raise ValueError("functional is not an interaction modulo constants")
    return core


def rg_flow(I, P, t, mode="full", omega_cap=None):
    """Graph-sum flow W(I, P): sum of gamma^g nu^b w_Gamma / |Aut| over
    connected stable ribbon graphs within the truncation.

    mode "tree" keeps only loop-number-zero graphs; mode "commutative"
    consumes and produces a CommFunctional, summing over stable graphs
    with hbar^{loop number} bookkeeping.

    omega_cap restricts the sum to graphs with 2 loop(Gamma) + legs
    bounded by the cap; this weighted bound is stable under composing
    flows, unlike the plain tensor-order bound."""
    if mode == "commutative":
        return _comm_flow(I, P, t, omega_cap)
    if mode not in ("full", "tree"):
        raise ValueError("unknown flow mode %r" % (mode,))
    core = _check_flowable(I, t)
    out = I.constants_part()
    shapes = core.shapes()
    max_loop = t.p_max if mode == "full" else 0
    for legs in range(0, t.l_max + 1):
        ml = max_loop
        if omega_cap is not None:
            ml = min(ml, (omega_cap - legs) // 2)
            if ml < 0:
                continue
        for ic in _graphs(ml, legs, shapes):
            G = ic.canonical
            w = feynman_weight(G, core, P)
            if w.is_zero():
                continue
            inv = graph_invariants(G)
            s = Fraction(1, ic.aut_order)
            for (i, j, ws), c in w.terms.items():
                out.add_term(i + inv.g, j + inv.b, ws, c * s)
    return out


def _refit(F, p_max, l_max):
    """Copy F into new truncation bounds, dropping what no longer fits."""
    out = type(F)(F.basis, p_max, l_max)
    if isinstance(F, CommFunctional):
        for (i, mono), c in F.terms.items():
            out.add_term(i, list(mono), c)
    else:
        for (i, j, ws), c in F.terms.items():
            out.add_term(i, j, [list(w) for w in ws], c)
    return out


def compose_flow(I, P1, P2, t, mode="full"):
    """W(W(I, P1), P2) with the intermediate functional carried on an
    enlarged truncation so that the composite agrees with W(I, P1+P2)
    within t.

    The plain tensor-order bound is not stable under composition: a term
    within t can flow through an intermediate term whose word is longer
    than l_max.  The weighted bound 2(2i+j+k-1)+l is stable, so the
    intermediate stage keeps everything below 2 p_max + l_max."""
    cap = 2 * t.p_max + t.l_max
    t_int = Truncation(t.p_max, cap)
    W1 = rg_flow(_refit(I, t.p_max, cap), P1, t_int, mode, omega_cap=cap)
    W2 = rg_flow(W1, P2, t_int, mode, omega_cap=cap)
    return _refit(W2, t.p_max, t.l_max)


def _decorated_vertex_sum(I, J, P, t, omega_cap=None):
    """Sum over graphs with one distinguished vertex carrying J, weighted
    by gamma^g nu^b / |Aut(Gamma, v)| via orbit counting."""
    core = _check_flowable(I, t)
    out = J.constants_part()
    ishapes = core.shapes()
    jshapes = J.modulo_constants().shapes()
    stable = lambda s: 2 * (2 * s[0] + s[1] + len(s[2]) - 1) + sum(s[2]) >= 3
    extra = {s for s in jshapes if not stable(s)}
    both = ishapes | {s for s in jshapes if stable(s)}
    for legs in range(0, t.l_max + 1):
        ml = t.p_max
        if omega_cap is not None:
            ml = min(ml, (omega_cap - legs) // 2)
            if ml < 0:
                continue
        batches = [_graphs(ml, legs, both)]
        if extra:
            batches.append(_graphs(ml, legs, ishapes, extra=extra))
        for batch in batches:
            for ic in batch:
                G = ic.canonical
                inv = None
                for v in G.vertices:
                    dec = Decoration(kind="vertex", vertex=v, J=J)
                    w = feynman_weight(G, core, P, dec)
                    if w.is_zero():
                        continue
                    if inv is None:
                        inv = graph_invariants(G)
                    s = Fraction(1, ic.aut_order)
                    for (i, j, ws), c in w.terms.items():
                        out.add_term(i + inv.g, j + inv.b, ws, c * s)
    return out


def edge_decorated_sum(I, P, K, t):
    """Sum over graphs with one distinguished edge contracted against K
    instead of P, weighted by gamma^g nu^b / |Aut(Gamma, e)|."""
    core = _check_flowable(I, t)
    out = NCFunctional(I.basis, t.p_max, t.l_max)
    shapes = core.shapes()
    for legs in range(0, t.l_max + 1):
        for ic in _graphs(t.p_max, legs, shapes):
            G = ic.canonical
            inv = None
            for e in G.edges():
                dec = Decoration(kind="edge", edge=e, K=K)
                w = feynman_weight(G, core, P, dec)
                if w.is_zero():
                    continue
                if inv is None:
                    inv = graph_invariants(G)
                s = Fraction(1, ic.aut_order)
                for (i, j, ws), c in w.terms.items():
                    out.add_term(i + inv.g, j + inv.b, ws, c * s)
    return out


def qme_flow_check(I, triple, t, m):
    """Both sides of the scale-change master equation identity.

    lhs is the scale-L master equation residual of W(I, P); rhs is the
    distinguished-vertex graph sum attaching the scale-eps residual of I.
    Both sides are carried on the composition-stable weighted truncation
    internally and reduced to t at the end.  Returns (lhs, rhs, lhs - rhs)."""
    cap = 2 * t.p_max + t.l_max
    t_int = Truncation(t.p_max, cap)
    I_big = _refit(I, t.p_max, cap)
    W = rg_flow(I_big, triple.P, t_int, omega_cap=cap)
    lhs = _refit(bv.qme_residual(W, triple.K_L, "quantum", m),
                 t.p_max, t.l_max)
    R = bv.qme_residual(I_big, triple.K_eps, "quantum", m)
    rhs = _refit(_decorated_vertex_sum(I_big, R, triple.P, t_int,
                                       omega_cap=cap),
                 t.p_max, t.l_max)
    return lhs, rhs, lhs - rhs


# -- commutative flow ----------------------------------------------------------

def _comm_attachments(basis, G, v, F):
    out = []
    hs = G.incident(v)
    for (i, mono), c in F.terms.items():
        if i != G.loop_of[v] or len(mono) != len(hs):
            continue
        pars = [basis.parity(x) for x in mono]
        for perm in permutations(range(len(mono))):
            sign = perm_sign(pars, perm)
            lw = tuple((mono[p], h) for p, h in zip(perm, hs))
            out.append((lw, c * sign))
    return out


def _comm_contract(basis, state, h1, h2, K):
    out = []
    for mono, c in state:
        idx = {tag: i for i, (_, tag) in enumerate(mono)}
        i0, j0 = idx[h1], idx[h2]
        if i0 > j0:
            i0, j0 = j0, i0
        p = [basis.parity(x) for x, _ in mono]
        kv = K.tensor[mono[i0][0]][mono[j0][0]]
        if not kv:
            continue
        coeff = -kv if p[i0] & p[j0] else kv
        e = ((p[i0] & sum(p[:i0]) & 1)
             ^ (p[j0] & ((sum(p[:j0]) - p[i0]) & 1)))
        if e:
            coeff = -coeff
        rest = tuple(x for t, x in enumerate(mono) if t not in (i0, j0))
        out.append((rest, c * coeff))
    return out


def _comm_flow(I, P, t, omega_cap=None):
    basis = I.basis
    out = CommFunctional(basis, t.p_max, t.l_max)
    core = CommFunctional(basis, t.p_max, t.l_max)
    for (i, mono), c in I.terms.items():
        if not mono:
            out.add_term(i, mono, c)
        elif 2 * i + len(mono) < 3:
            raise ValueError("unstable commutative vertex term")
        else:
            core.terms[(i, mono)] = c
    shapes = core.shapes()
    for legs in range(0, t.l_max + 1):
        ml = t.p_max
        if omega_cap is not None:
            ml = min(ml, (omega_cap - legs) // 2)
            if ml < 0:
                continue
        for ic in _graphs(ml, legs, shapes, ribbon=False):
            G = ic.canonical
            state = [((), Fraction(1))]
            dead = False
            for v in G.vertices:
                att = _comm_attachments(basis, G, v, core)
                if not att:
                    dead = True
                    break
                state = [(m1 + m2, c1 * c2) for m1, c1 in state
                         for m2, c2 in att]
            if dead:
                continue
            for x, y in G.edges():
                if P is None:
                    dead = True
                    break
                state = _comm_contract(basis, state, x, y, P)
                if not state:
                    dead = True
                    break
            if dead:
                continue
            inv = graph_invariants(G)
            s = Fraction(1, ic.aut_order)
            for mono, c in state:
                out.add_term(inv.ell, [x for x, _ in mono], c * s)
    return out


# -- filtered flow delta and theory families -----------------------------------

def filtered_delta(I, J, P, p):
    """W(I + J, P) - W(I, P) modulo F_{p+1}, via the sum over trees with a
    single loop-number-p vertex carrying J."""
    if p <= 0:
        raise ValueError("the filtration level must be positive")
    if J.filtration_from(p) != J:
        raise ValueError("deformation does not lie in F_p")
    t = Truncation(I.p_max, I.l_max)
    I0 = I.filtration_component(0)
    Jp = J.filtration_component(p)
    out = NCFunctional(I.basis, I.p_max, I.l_max)
    if Jp.is_zero():
        return out
    core = _check_flowable(I0 + Jp.modulo_constants(), t)
    ishapes = I0.shapes()
    jcore = Jp.modulo_constants()
    for (i, j, ws), c in Jp.constants_part().terms.items():
        out.add_term(i, j, ws, c)
    stable = lambda s: 2 * (2 * s[0] + s[1] + len(s[2]) - 1) + sum(s[2]) >= 3
    jshapes = jcore.shapes()
    extra = {s for s in jshapes if not stable(s)}
    both = ishapes | {s for s in jshapes if stable(s)}
    for legs in range(0, I.l_max + 1):
        batches = [_graphs(p, legs, both)]
        if extra:
            batches.append(_graphs(p, legs, ishapes, extra=extra))
        for batch in batches:
            for ic in batch:
                G = ic.canonical
                inv = graph_invariants(G)
                if inv.p_tree_level != p:
                    continue
                for v in G.vertices:
                    dec = Decoration(kind="vertex", vertex=v, J=jcore)
                    w = feynman_weight(G, I0, P, dec)
                    if w.is_zero():
                        continue
                    s = Fraction(1, ic.aut_order)
                    for (i, j, ws), c in w.terms.items():
                        out.add_term(i + inv.g, j + inv.b, ws, c * s)
    return out


def theory_family(I, m, scales, eps, t):
    """Per-scale flowed interactions I[L] = W(I, P(eps, L)) with pairwise
    renormalization-group consistency flags (binary64 kernels)."""
    from .model import heat_propagator
    cap = 2 * t.p_max + t.l_max
    t_int = Truncation(t.p_max, cap)
    I_big = _refit(I, t.p_max, cap)
    out = {}
    big = {}
    kernels = {}
    for L in scales:
        K_eps, K_L, P = heat_propagator(m, eps, L)
        kernels[L] = (K_eps, K_L, P)
        big[L] = rg_flow(I_big, P, t_int, omega_cap=cap)
        out[L] = _refit(big[L], t.p_max, t.l_max)
    checks = []
    ordered = sorted(scales)
    for L1, L2 in zip(ordered, ordered[1:]):
        _, _, P12 = heat_propagator(m, L1, L2)
        chained = _refit(rg_flow(big[L1], P12, t_int, omega_cap=cap),
                         t.p_max, t.l_max)
        checks.append((L1, L2, functional_distance(out[L2], chained)))
    return out, kernels, checks


def functional_distance(F1, F2):
    """Max absolute coefficient difference (binary64 tolerance checks)."""
    keys = set(F1.terms) | set(F2.terms)
    return max((abs(float(F1.terms.get(k, 0)) - float(F2.terms.get(k, 0)))
                for k in keys), default=0.0)


# -- obstruction cocycles ------------------------------------------------------

def obstruction(I_tilde, K_L, p, m):
    """The first potentially nonvanishing master-equation residual class
    O_{p+1}[L] in F_{p+1}/F_{p+2}, with its closedness residual under
    Q + {I_[0], -}_L.

    Returns (O, closedness_residual)."""
    R = bv.qme_residual(I_tilde, K_L, "quantum", m)
    low = R - R.filtration_from(p + 1)
    if not low.is_zero():
        raise ValueError("master equation violated below the filtration level")
    O = R.filtration_component(p + 1)
    I0 = I_tilde.filtration_component(0)
    closed = (bv.q_action(m, O) - bv.bracket(I0, O, K_L)).filtration_component(p + 1)
    return O, closed


def coboundary_shift(I_tilde, W_shift, K_L, p, m):
    """Predicted change of the obstruction class when the lift moves by an
    F_{p+1} element: (Q + {I_[0], -}_L) W_shift in F_{p+1}/F_{p+2}."""
    I0 = I_tilde.filtration_component(0)
    return (bv.q_action(m, W_shift)
            - bv.bracket(I0, W_shift, K_L)).filtration_component(p + 1)
