"""Algebraic BV operations on cyclic-word functionals.

Implements the degree-one kernel bracket and cobracket on cyclic words,
the induced BV Laplacian, the classical Hamiltonian bracket through the
symplectic vector-field correspondence, master equation residuals, the
ghost/anti-field gauge construction and the cubic trace interaction of
Chern-Simons type.  All operations are exact.

A spliced word of length zero is the constant generator of the symmetric
algebra and is recorded as a factor of nu; this matches the boundary
increment rule for contracting graph loops with an empty side.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .tensor import (NCFunctional, GradedBasis, eval_sign, rotation_sign,
                     word_parity, evaluate_component)
from .model import FreeBVModel, zeros, tensor_extend_model


# -- kernel checks -----------------------------------------------------------

def _check_kernel(basis, K):
    par = lambda a: basis.degrees[a] & 1
    for a, row in enumerate(K.tensor):
        for b, x in enumerate(row):
            if not x:
                continue
            if basis.degrees[a] + basis.degrees[b] != K.degree:
                raise ValueError("kernel entry off-degree at (%d,%d)" % (a, b))
            s = -1 if par(a) & par(b) else 1
            if K.tensor[b][a] != s * x:
                raise ValueError("kernel not graded symmetric at (%d,%d)" % (a, b))


# -- word-level splice operations ---------------------------------------------

def _word_bracket_terms(basis, K, w1, w2):
    """Two-word splices (jshift, words, coeff): pair one letter from each
    cyclic word against the kernel and join the remainders.

    The global parity terms in the Koszul sign carry the parity of the
    kernel, so the same splice rule serves even kernels as well."""
    m, n = len(w1), len(w2)
    kp = K.degree & 1
    p1 = basis.parities(w1)
    p2 = basis.parities(w2)
    s1 = sum(p1) & 1
    s2 = sum(p2) & 1
    out = []
    for i in range(m):
        for j in range(n):
            kv = K.tensor[w2[j]][w1[i]]
            if not kv:
                continue
            pair = -kv if p1[i] & p2[j] else kv
            e = (((p1[i] ^ kp) & s2) ^ (kp & s1)
                 ^ ((sum(p1[:i + 1]) & 1) & (sum(p1[i + 1:]) & 1))
                 ^ ((sum(p2[:j + 1]) & 1) & (sum(p2[j + 1:]) & 1)))
            coeff = -pair if e else pair
            word = w1[i + 1:] + w1[:i] + w2[j + 1:] + w2[:j]
            if word:
                out.append((0, [word], coeff))
            else:
                out.append((1, [], coeff))
    return out


def _word_cobracket_terms(basis, K, w):
    """Single-word splits (jshift, words, coeff): pair two letters of one
    cyclic word against the kernel, splitting it into two sides."""
    n = len(w)
    kp = K.degree & 1
    p = basis.parities(w)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            kv = K.tensor[w[i]][w[j]]
            if not kv:
                continue
            pair = -kv if p[i] & p[j] else kv
            e = (((sum(p[:i + 1]) & 1) & (sum(p[i + 1:]) & 1))
                 ^ (p[j] & ((sum(p[:i + 1]) + sum(p[j + 1:])) & 1))
                 ^ (kp & sum(p) & 1))
            coeff = -pair if e else pair
            wa = w[i + 1:j]
            wb = w[j + 1:] + w[:i]
            words = [x for x in (wa, wb) if x]
            out.append((2 - len(words), words, coeff))
    return out


# -- Leibniz driver -----------------------------------------------------------

def _leibniz_pairs(f, g, word_op, out):
    """Extend a degree-one binary word operation to symmetric products of
    words by the Leibniz rule, accumulating into out."""
    basis = f.basis
    for (i1, j1, ws1), c1 in f.terms.items():
        q1 = [word_parity(basis, w) for w in ws1]
        t1 = sum(q1)
        for (i2, j2, ws2), c2 in g.terms.items():
            q2 = [word_parity(basis, w) for w in ws2]
            for a in range(len(ws1)):
                ea = (q1[a] & (sum(q1[a + 1:]) & 1)) ^ ((t1 - q1[a]) & 1)
                rest1 = list(ws1[:a]) + list(ws1[a + 1:])
                for b in range(len(ws2)):
                    e = ea ^ (q2[b] & (sum(q2[:b]) & 1))
                    base = -c1 * c2 if e else c1 * c2
                    rest2 = list(ws2[:b]) + list(ws2[b + 1:])
                    for jshift, mid, coeff in word_op(ws1[a], ws2[b]):
                        out.add_term(i1 + i2, j1 + j2 + jshift,
                                     rest1 + mid + rest2, base * coeff)


def _shift(F, di=0, dj=0):
    out = NCFunctional(F.basis, F.p_max, F.l_max)
    for (i, j, ws), c in F.terms.items():
        out.add_term(i + di, j + dj, ws, c)
    return out


# -- kernel bracket and Laplacian ----------------------------------------------

def bracket(f, g, K):
    """Degree-one kernel bracket, Leibniz-extended to products of words
    and linear in the gamma/nu coefficients."""
    f._check(g)
    _check_kernel(f.basis, K)
    out = NCFunctional(f.basis, f.p_max, f.l_max)
    _leibniz_pairs(f, g, lambda w1, w2: _word_bracket_terms(f.basis, K, w1, w2),
                   out)
    return out


def bv_laplacian(I, K):
    """BV Laplacian Delta = cobracket part + gamma * pair-bracket part.

    Returns (Delta, cobracket_part, ce_part) with Delta equal to the
    cobracket part plus the gamma-shifted ce part.
    """
    _check_kernel(I.basis, K)
    basis = I.basis
    kp = K.degree & 1
    cob = NCFunctional(basis, I.p_max, I.l_max)
    ce = NCFunctional(basis, I.p_max, I.l_max)
    for (i, j, ws), c in I.terms.items():
        q = [word_parity(basis, w) for w in ws]
        for a in range(len(ws)):
            sgn = -c if kp & sum(q[:a]) & 1 else c
            rest = list(ws[:a]) + list(ws[a + 1:])
            for jshift, mid, coeff in _word_cobracket_terms(basis, K, ws[a]):
                cob.add_term(i, j + jshift, list(ws[:a]) + mid + list(ws[a + 1:]),
                             sgn * coeff)
            for b in range(a + 1, len(ws)):
                e = (q[a] & (sum(q[:a]) & 1)) ^ (q[b] & ((sum(q[:b]) - q[a]) & 1))
                base = -c if e else c
                rest2 = [w for t, w in enumerate(ws) if t != a and t != b]
                for jshift, mid, coeff in _word_bracket_terms(basis, K, ws[a], ws[b]):
                    ce.add_term(i, j + jshift, mid + rest2, base * coeff)
    delta = cob + _shift(ce, di=1)
    return delta, cob, ce


# -- vector fields -------------------------------------------------------------

class VectorField:
    """Finitely supported derivation data: components[n] maps an input
    tuple of basis letters to the output vector as a letter->coeff dict."""

    def __init__(self, basis):
        self.basis = basis
        self.components = {}

    def add(self, inputs, out, coeff):
        coeff = Fraction(coeff)
        if coeff == 0:
            return self
        inputs = tuple(inputs)
        table = self.components.setdefault(len(inputs), {})
        vec = table.setdefault(inputs, {})
        new = vec.get(out, Fraction(0)) + coeff
        if new == 0:
            vec.pop(out, None)
            if not vec:
                table.pop(inputs, None)
                if not table:
                    self.components.pop(len(inputs), None)
        else:
            vec[out] = new
        return self

    def entries(self):
        for n, table in self.components.items():
            for inputs, vec in table.items():
                for out, c in vec.items():
                    yield inputs, out, c

    def degree(self):
        degs = {self.basis.degrees[out] - sum(self.basis.degrees[x] for x in inputs)
                for inputs, out, _ in self.entries()}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError("vector field not homogeneous")
        return degs.pop()

    def parity(self):
        d = self.degree()
        return 0 if d is None else d & 1

    def apply(self, inputs):
        return dict(self.components.get(len(inputs), {}).get(tuple(inputs), {}))

    def scale(self, c):
        out = VectorField(self.basis)
        for inputs, o, v in self.entries():
            out.add(inputs, o, v * c)
        return out

    def __add__(self, other):
        out = VectorField(self.basis)
        for inputs, o, v in self.entries():
            out.add(inputs, o, v)
        for inputs, o, v in other.entries():
            out.add(inputs, o, v)
        return out

    def __eq__(self, other):
        return (isinstance(other, VectorField) and self.basis == other.basis
                and self.components == other.components)

    def is_zero(self):
        return not self.components

    def compose(self, other):
        """Insert this field's output into each slot of the other field."""
        out = VectorField(self.basis)
        px = self.parity()
        par = self.basis.parity
        for m, table in other.components.items():
            for yin, yvec in table.items():
                for i in range(m):
                    pre = sum(par(x) for x in yin[:i]) & 1
                    sgn = -1 if px & pre else 1
                    for nx, xtable in self.components.items():
                        for xin, xvec in xtable.items():
                            v = xvec.get(yin[i])
                            if not v:
                                continue
                            comp = yin[:i] + xin + yin[i + 1:]
                            for o, c in yvec.items():
                                out.add(comp, o, sgn * v * c)
        return out

    def gerstenhaber(self, other):
        s = -1 if self.parity() & other.parity() else 1
        return self.compose(other) + other.compose(self).scale(-s)

    def is_symplectic(self, m):
        """Check cyclic symmetry of (s_1..s_n, s_0) -> <X(s_1..s_n), s_0>."""
        par = self.basis.parity
        F = {}
        for inputs, out, c in self.entries():
            for s0 in range(self.basis.dim):
                v = c * m.pairing[out][s0]
                if v:
                    key = inputs + (s0,)
                    F[key] = F.get(key, Fraction(0)) + v
        keys = set(F)
        for S in keys:
            pars = [par(x) for x in S]
            for r in range(1, len(S)):
                rot = S[r:] + S[:r]
                lhs = F.get(rot, Fraction(0))
                rhs = rotation_sign(pars, r) * F.get(S, Fraction(0))
                if lhs != rhs:
                    return False
        return True


def q_vector_field(m):
    """The differential of the model as an arity-one vector field."""
    X = VectorField(m.basis)
    for b in range(m.dim):
        for c in range(m.dim):
            if m.Q[c][b]:
                X.add((b,), c, m.Q[c][b])
    return X


def _accumulate_word_field(X, m, ginv, w, c):
    """Add the symplectic field of a single cyclic word to X."""
    pars = m.basis.parities(w)
    es = eval_sign(pars)
    n = len(w)
    for r in range(n):
        rot = w[r:] + w[:r]
        rs = rotation_sign(pars, r)
        prefix = rot[:-1]
        last = rot[-1]
        for d in range(m.dim):
            if ginv[last][d]:
                X.add(prefix, d, c * rs * es * ginv[last][d])


def hamiltonian_vector_field(h, m):
    """The unique vector field X with h(s_1..s_l) = <X(s_1..s_{l-1}), s_l>
    on the single-word part of h; constant terms place no constraint."""
    ginv = m.pairing_inverse()
    X = VectorField(m.basis)
    for (i, j, ws), c in h.terms.items():
        if not ws:
            continue
        if i or j or len(ws) > 1:
            raise ValueError("functional is not a single-word series")
        _accumulate_word_field(X, m, ginv, ws[0], c)
    return X


def _word_field_action(basis, X, w):
    """Raw contributions (jshift, words, coeff) of a vector field acting on
    a single cyclic word: insert the field output into the last slot of
    every rotation and read the result back as cyclic words."""
    n = len(w)
    pars = basis.parities(w)
    es = eval_sign(pars)
    px = X.parity()
    raw = {}
    for nx, table in X.components.items():
        for r in range(n):
            rot = w[r:] + w[:r]
            rs = rotation_sign(pars, r)
            head = rot[:-1]
            last = rot[-1]
            hp = sum(basis.parity(x) for x in head) & 1
            sgn = -1 if px & hp else 1
            for xin, vec in table.items():
                v = vec.get(last)
                if not v:
                    continue
                S = head + xin
                raw[S] = raw.get(S, Fraction(0)) + rs * es * sgn * v
    out = []
    for S, val in raw.items():
        if val == 0:
            continue
        if S:
            out.append((0, [S], val * eval_sign(basis.parities(S))))
        else:
            out.append((1, [], val))
    return out


def field_action(m, X, h):
    """Action of a vector field on a functional, Leibniz over word factors
    and linear in the gamma/nu coefficients."""
    basis = h.basis
    px = X.parity()
    out = NCFunctional(basis, h.p_max, h.l_max)
    for (i, j, ws), c in h.terms.items():
        q = [word_parity(basis, w) for w in ws]
        for a in range(len(ws)):
            sgn = -c if px & (sum(q[:a]) & 1) else c
            for jshift, mid, coeff in _word_field_action(basis, X, ws[a]):
                out.add_term(i, j + jshift,
                             list(ws[:a]) + mid + list(ws[a + 1:]), sgn * coeff)
    return out


def q_action(m, h):
    """Differential induced on functionals by the model differential.

    Acts on each word factor through the vector field of Q with a
    per-word parity twist; in this convention it squares to zero and
    commutes with the Laplacian of every closed kernel.  On a single
    word it is (-1)^{|w|} times the plain vector-field action."""
    basis = h.basis
    X = q_vector_field(m)
    out = NCFunctional(basis, h.p_max, h.l_max)
    for (i, j, ws), c in h.terms.items():
        q = [word_parity(basis, w) for w in ws]
        for a in range(len(ws)):
            sgn = -c if (sum(q[:a]) + q[a]) & 1 else c
            for jshift, mid, coeff in _word_field_action(basis, X, ws[a]):
                out.add_term(i, j + jshift,
                             list(ws[:a]) + mid + list(ws[a + 1:]), sgn * coeff)
    return out


def classical_bracket(f, h, m):
    """The Hamiltonian bracket {f,h} = (-1)^{|f||h|+|h|} X^f(h), computed
    word by word through the symplectic vector-field correspondence."""
    ginv = m.pairing_inverse()
    basis = f.basis

    def word_op(w1, w2):
        X = VectorField(basis)
        _accumulate_word_field(X, m, ginv, w1, Fraction(1))
        p1 = word_parity(basis, w1)
        p2 = word_parity(basis, w2)
        e = (p1 & p2) ^ p2
        res = []
        for jshift, mid, coeff in _word_field_action(basis, X, w2):
            res.append((jshift, mid, -coeff if e else coeff))
        return res

    out = NCFunctional(basis, f.p_max, f.l_max)
    _leibniz_pairs(f, h, word_op, out)
    return out


# -- master equation residuals ---------------------------------------------

def qme_residual(I, K, mode, m):
    """Master equation residual of an interaction.

    quantum: (Q - Delta_K)I - (1/2){I,I}_K, the scale residual for the
    kernel at that scale; classical: QI + (1/2){I,I} with the Hamiltonian
    bracket; mod_constants: the quantum residual split into its word part
    and the projected-out constant series, returned as a pair.
    """
    QI = q_action(m, I)
    if mode == "classical":
        return QI + classical_bracket(I, I, m).scale(Fraction(1, 2))
    if mode not in ("quantum", "mod_constants"):
        raise ValueError("unknown mode %r" % mode)
    if K is None:
        raise ValueError("quantum mode requires a kernel")
    if K.degree != 1:
        raise ValueError("scale kernel must have degree one")
    delta, _, _ = bv_laplacian(I, K)
    res = QI - delta - bracket(I, I, K).scale(Fraction(1, 2))
    if mode == "quantum":
        return res
    return res.modulo_constants(), res.constants_part()


# -- gauge construction ------------------------------------------------------

@dataclass
class GaugeData:
    """A finite graded associative algebra, a bimodule over it, and a
    degree-zero twisting derivation from the algebra to the bimodule.

    mult[a][b], left[a][i] and right[i][a] are coefficient vectors over
    the algebra and bimodule bases; d is a bimodule-by-algebra matrix or
    None.
    """
    u_letters: list
    u_degrees: list
    mult: list
    v_letters: list
    v_degrees: list
    left: list
    right: list
    d: list = None

    @property
    def nu(self):
        return len(self.u_letters)

    @property
    def nv(self):
        return len(self.v_letters)


def _vec_mul(table, x, y):
    """Bilinear extension of a structure-constant table to vectors."""
    n = len(table[0][0])
    out = [Fraction(0)] * n
    for a, xa in enumerate(x):
        if not xa:
            continue
        for b, yb in enumerate(y):
            if yb:
                row = table[a][b]
                for c in range(n):
                    if row[c]:
                        out[c] += xa * yb * row[c]
    return out


def validate_gauge(gd):
    """Check associativity, bimodule axioms and the Leibniz rule on basis
    triples; returns a list of violation strings."""
    errs = []
    nu, nv = gd.nu, gd.nv
    du, dv = gd.u_degrees, gd.v_degrees

    def deg_ok(vec, degs, want):
        return all(not c or degs[i] == want for i, c in enumerate(vec))

    for a in range(nu):
        for b in range(nu):
            if not deg_ok(gd.mult[a][b], du, du[a] + du[b]):
                errs.append("mult not degree zero at (%d,%d)" % (a, b))
        for i in range(nv):
            if not deg_ok(gd.left[a][i], dv, du[a] + dv[i]):
                errs.append("left action not degree zero at (%d,%d)" % (a, i))
            if not deg_ok(gd.right[i][a], dv, dv[i] + du[a]):
                errs.append("right action not degree zero at (%d,%d)" % (i, a))
        if gd.d is not None:
            dvec = [gd.d[i][a] for i in range(nv)]
            if not deg_ok(dvec, dv, du[a]):
                errs.append("twisting operator not degree zero at %d" % a)

    def uvec(a):
        v = [Fraction(0)] * nu
        v[a] = Fraction(1)
        return v

    def vvec(i):
        v = [Fraction(0)] * nv
        v[i] = Fraction(1)
        return v

    def umul(x, y):
        return _vec_mul(gd.mult, x, y)

    def lmul(x, y):
        return _vec_mul(gd.left, x, y)

    def rmul(y, x):
        return _vec_mul(gd.right, y, x)

    for a in range(nu):
        for b in range(nu):
            for c in range(nu):
                if umul(umul(uvec(a), uvec(b)), uvec(c)) != \
                        umul(uvec(a), umul(uvec(b), uvec(c))):
                    errs.append("mult not associative at (%d,%d,%d)" % (a, b, c))
            for i in range(nv):
                if lmul(umul(uvec(a), uvec(b)), vvec(i)) != \
                        lmul(uvec(a), lmul(uvec(b), vvec(i))):
                    errs.append("left action not associative at (%d,%d,%d)" % (a, b, i))
                if rmul(lmul(uvec(a), vvec(i)), uvec(b)) != \
                        lmul(uvec(a), rmul(vvec(i), uvec(b))):
                    errs.append("actions do not commute at (%d,%d,%d)" % (a, i, b))
                if rmul(rmul(vvec(i), uvec(a)), uvec(b)) != \
                        rmul(vvec(i), umul(uvec(a), uvec(b))):
                    errs.append("right action not associative at (%d,%d,%d)" % (i, a, b))
    if gd.d is not None:
        def dvec(x):
            return [sum((gd.d[i][a] * x[a] for a in range(nu)), Fraction(0))
                    for i in range(nv)]
        for a in range(nu):
            for b in range(nu):
                lhs = dvec(umul(uvec(a), uvec(b)))
                rhs = [x + y for x, y in zip(rmul(dvec(uvec(a)), uvec(b)),
                                             lmul(uvec(a), dvec(uvec(b))))]
                if lhs != rhs:
                    errs.append("Leibniz rule fails at (%d,%d)" % (a, b))
    return sorted(set(errs))


def gauge_model(gd):
    """Free BV model on ghosts + fields + anti-fields + anti-ghosts with
    the evaluation pairing; returns (model, layout index map)."""
    nu, nv = gd.nu, gd.nv
    letters = (["c_%s" % u for u in gd.u_letters] + list(gd.v_letters)
               + ["%s*" % v for v in gd.v_letters]
               + ["c_%s*" % u for u in gd.u_letters])
    degrees = ([d - 1 for d in gd.u_degrees] + list(gd.v_degrees)
               + [1 - d for d in gd.v_degrees]
               + [2 - d for d in gd.u_degrees])
    basis = GradedBasis(letters, degrees)
    n = basis.dim
    layout = {
        "ghost": list(range(0, nu)),
        "field": list(range(nu, nu + nv)),
        "antifield": list(range(nu + nv, nu + 2 * nv)),
        "antighost": list(range(nu + 2 * nv, n)),
    }
    g = zeros(n)
    for i in range(nv):
        f, af = layout["field"][i], layout["antifield"][i]
        g[af][f] = Fraction(1)
        s = -1 if (degrees[af] & 1) & (degrees[f] & 1) else 1
        g[f][af] = -s * Fraction(1)
    for a in range(nu):
        gh, agh = layout["ghost"][a], layout["antighost"][a]
        g[agh][gh] = Fraction(1)
        s = -1 if (degrees[agh] & 1) & (degrees[gh] & 1) else 1
        g[gh][agh] = -s * Fraction(1)
    return FreeBVModel(basis, g, zeros(n)), layout


def gauge_vector_field(gd, model, layout):
    """The degree-one field encoding the twisting operator and the
    suspended multiplication on ghosts and fields."""
    X = VectorField(model.basis)
    gh, fl = layout["ghost"], layout["field"]
    if gd.d is not None:
        for a in range(gd.nu):
            for i in range(gd.nv):
                if gd.d[i][a]:
                    X.add((gh[a],), fl[i], gd.d[i][a])
    for a in range(gd.nu):
        for b in range(gd.nu):
            s = -1 if (gd.u_degrees[a] + 1) & 1 else 1
            for c in range(gd.nu):
                if gd.mult[a][b][c]:
                    X.add((gh[a], gh[b]), gh[c], s * gd.mult[a][b][c])
        for i in range(gd.nv):
            for j in range(gd.nv):
                if gd.left[a][i][j]:
                    X.add((gh[a], fl[i]), fl[j], -gd.left[a][i][j])
                if gd.right[i][a][j]:
                    s = -1 if gd.v_degrees[i] & 1 else 1
                    X.add((fl[i], gh[a]), fl[j], s * gd.right[i][a][j])
    return X


def _functional_from_field(model, X, out_letters, p_max, l_max):
    """The unique cyclic functional, linear in the given dual letters,
    whose symplectic field extends X."""
    S = NCFunctional(model.basis, p_max, l_max)
    for n, table in X.components.items():
        for xin, vec in table.items():
            for y in out_letters:
                val = sum((c * model.pairing[d][y] for d, c in vec.items()),
                          Fraction(0))
                if val:
                    w = xin + (y,)
                    S.add_term(0, 0, [w], val * eval_sign(model.basis.parities(w)))
    return S


def gauge_action(gd, S_V=None, p_max=2, l_max=6):
    """Assemble the gauge sector of a twisted bimodule and test a matter
    functional against it.

    Returns (model, X_gauge, S_gauge, total_residual, condition_report):
    the BV model on ghosts/fields/anti-fields/anti-ghosts, the degree-one
    gauge field, its generating functional, the classical master equation
    residual of S_gauge + S_V, and a report evaluating the linear and
    bimodule invariance conditions on S_V term by term.
    """
    errs = validate_gauge(gd)
    if errs:
        raise ValueError("invalid gauge data: " + "; ".join(errs))
    model, layout = gauge_model(gd)
    X = gauge_vector_field(gd, model, layout)
    anti = layout["antifield"] + layout["antighost"]
    S_gauge = _functional_from_field(model, X, anti, p_max, l_max)
    if S_V is None:
        S_V = NCFunctional(model.basis, p_max, l_max)
    if S_V.basis != model.basis:
        raise ValueError("matter functional is not over the gauge model basis")
    fields = set(layout["field"])
    for (i, j, ws) in S_V.terms:
        if i or j or len(ws) != 1 or any(x not in fields for w in ws for x in w):
            raise ValueError("matter functional must be single field words")
    total = S_gauge + S_V
    residual = qme_residual(total, None, "classical", model)
    report = _gauge_condition_report(gd, model, layout, S_V)
    return model, X, S_gauge, residual, report


def _gauge_condition_report(gd, model, layout, S_V):
    """Evaluate the invariance conditions on the matter functional."""
    fl = layout["field"]
    nu, nv = gd.nu, gd.nv

    def ev(args):
        return evaluate_component(S_V, 0, 0, 1, args)

    def d_at(a):
        if gd.d is None:
            return [Fraction(0)] * nv
        return [Fraction(gd.d[i][a]) for i in range(nv)]

    linear = []
    for a in range(nu):
        val = sum((d_at(a)[i] * ev((fl[i],)) for i in range(nv)), Fraction(0))
        if val:
            linear.append((gd.u_letters[a], val))
    maxlen = max((len(ws[0]) for (_, _, ws) in S_V.terms), default=0)
    bimodule = []
    for l in range(1, maxlen + 1):
        for a in range(nu):
            da = d_at(a)
            for vt in product(range(nv), repeat=l):
                args = tuple(fl[i] for i in vt)
                lhs = sum((da[i] * ev((fl[i],) + args) for i in range(nv)),
                          Fraction(0))
                rhs1 = sum((gd.left[a][vt[0]][j] * ev((fl[j],) + args[1:])
                            for j in range(nv)), Fraction(0))
                rhs2 = sum((gd.right[vt[-1]][a][j] * ev(args[:-1] + (fl[j],))
                            for j in range(nv)), Fraction(0))
                p = gd.u_degrees[a] & sum(gd.v_degrees[i] for i in vt) & 1
                diff = lhs - rhs1 + (-rhs2 if p else rhs2)
                if diff:
                    bimodule.append((l, gd.u_letters[a],
                                     tuple(gd.v_letters[i] for i in vt), diff))
    return {"linear": linear, "bimodule": bimodule,
            "satisfied": not linear and not bimodule}


# -- cubic trace interaction ---------------------------------------------------

def _wedge_data():
    """Basis, degrees, products and top-coefficient trace of the exterior
    algebra on three odd generators."""
    subsets = [(), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)]
    names = ["1"] + ["t%s" % "".join(map(str, s)) for s in subsets[1:]]
    index = {s: i for i, s in enumerate(subsets)}
    degrees = [len(s) for s in subsets]

    def wedge(s1, s2):
        if set(s1) & set(s2):
            return None, 0
        merged = list(s1) + list(s2)
        sign = 1
        for i in range(len(merged)):
            for j in range(i + 1, len(merged)):
                if merged[i] > merged[j]:
                    sign = -sign
        return index[tuple(sorted(merged))], sign

    trace = [Fraction(0)] * 8
    trace[index[(1, 2, 3)]] = Fraction(1)
    return subsets, names, degrees, index, wedge, trace


def cs_model(A):
    """Free BV model on the shifted wedge algebra of three odd generators
    tensored with a Frobenius algebra; the differential is zero."""
    subsets, names, degrees, index, wedge, trace = _wedge_data()
    g = zeros(8)
    for a, s1 in enumerate(subsets):
        for b, s2 in enumerate(subsets):
            k, sign = wedge(s1, s2)
            if k is not None and trace[k]:
                s = -1 if degrees[a] & 1 else 1
                g[a][b] = s * sign * trace[k]
    base = FreeBVModel(GradedBasis(names, [d - 1 for d in degrees]), g, zeros(8))
    return tensor_extend_model(base, A)


def cs_interaction(A, m, p_max=2, l_max=6):
    """Cubic trace interaction I(A1,A2,A3) = (-1)^{|A2|} (1/3) Tr(A1 A2 A3)
    on the model built by cs_model."""
    subsets, names, degrees, index, wedge, trace = _wedge_data()
    nA = len(A.basis)
    if m.dim != 8 * nA:
        raise ValueError("model does not match the Frobenius algebra")
    wtriples = []
    for a, s1 in enumerate(subsets):
        for b, s2 in enumerate(subsets):
            k12, sg12 = wedge(s1, s2)
            if k12 is None:
                continue
            for c, s3 in enumerate(subsets):
                k, sg3 = wedge(subsets[k12], s3)
                if k is not None and trace[k]:
                    wtriples.append((a, b, c, sg12 * sg3 * trace[k]))
    atr = [[[sum((A.mult[x][y][z] * sum((A.mult[z][w][u] * A.trace[u]
                                         for u in range(nA)), Fraction(0))
                  for z in range(nA)), Fraction(0))
             for w in range(nA)] for y in range(nA)] for x in range(nA)]
    I = NCFunctional(m.basis, p_max, l_max)
    for (a, b, c, tw) in wtriples:
        s2 = -1 if degrees[b] & 1 else 1
        for x in range(nA):
            for y in range(nA):
                for z in range(nA):
                    ta = atr[x][y][z]
                    if not ta:
                        continue
                    word = (a * nA + x, b * nA + y, c * nA + z)
                    es = eval_sign(m.basis.parities(word))
                    I.add_term(0, 0, [word], Fraction(s2 * tw * ta * es, 9))
    return I
