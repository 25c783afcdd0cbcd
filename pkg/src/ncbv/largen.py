"""Frobenius algebras and the large-N correspondence.

A finite-dimensional graded Frobenius algebra supplies open-TFT
structure maps Z^{g,b}, and tensoring a free BV model with it extends
cyclic-word functionals through the Morita transform.  Together with
the quotient to symmetric words this realizes the matrix-model side of
the correspondence: gamma goes to hbar^2, nu goes to N hbar.
"""

from fractions import Fraction
from itertools import product

from .tensor import GradedBasis, NCFunctional, CommFunctional
from .model import Kernel, invert


class FrobeniusAlgebra:
    """Associative unital algebra with a trace whose induced pairing
    Tr(ab) is nondegenerate; optionally differential graded.

    mult[a][b] is the coefficient vector of e_a e_b, trace is the trace
    form on the basis, d (optional) a degree one differential given as
    a matrix acting on coefficient vectors.  pm overrides the pairing
    matrix (used to exercise validation failures).
    """

    def __init__(self, basis, degrees, mult, trace, d=None, pm=None):
        self.basis = list(basis)
        self.degrees = list(degrees)
        self.mult = [[[Fraction(c) for c in row] for row in blk]
                     for blk in mult]
        self.trace = [Fraction(c) for c in trace]
        self.d = d
        self._pm = pm

    @property
    def dim(self):
        return len(self.basis)

    def parity(self, a):
        return self.degrees[a] & 1

    def pairing_matrix(self):
        if self._pm is not None:
            return self._pm
        n = self.dim
        return [[sum((self.mult[a][b][c] * self.trace[c] for c in range(n)),
                     Fraction(0)) for b in range(n)] for a in range(n)]

    def pairing_inverse(self):
        """Coefficients of the symmetric tensor sum x_i (x) y_i, or None
        if the trace pairing is degenerate."""
        return invert(self.pairing_matrix())

    def product(self, u, v):
        n = self.dim
        out = [Fraction(0)] * n
        for a in range(n):
            if not u[a]:
                continue
            for b in range(n):
                if not v[b]:
                    continue
                c = u[a] * v[b]
                for x in range(n):
                    out[x] += c * self.mult[a][b][x]
        return out

    def trace_of(self, u):
        return sum((self.trace[a] * u[a] for a in range(self.dim)),
                   Fraction(0))

    def unit(self):
        """The two-sided unit as a coefficient vector, or None."""
        n = self.dim
        rows, rhs = [], []
        for a in range(n):
            for c in range(n):
                rows.append([self.mult[x][a][c] for x in range(n)])
                rhs.append(Fraction(int(a == c)))
                rows.append([self.mult[a][x][c] for x in range(n)])
                rhs.append(Fraction(int(a == c)))
        u = _solve_rectangular(rows, rhs)
        return u

    def basis_vector(self, a):
        out = [Fraction(0)] * self.dim
        out[a] = Fraction(1)
        return out


def _solve_rectangular(rows, rhs):
    """Exact solution of an overdetermined consistent linear system by
    Gaussian elimination; None if inconsistent."""
    if not rows:
        return []
    ncols = len(rows[0])
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(M)) if M[r][col] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        p = M[rank][col]
        M[rank] = [x / p for x in M[rank]]
        for r in range(len(M)):
            if r != rank and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[rank])]
        pivots.append(col)
        rank += 1
    for r in range(rank, len(M)):
        if M[r][ncols] != 0:
            return None
    sol = [Fraction(0)] * ncols
    for r, col in enumerate(pivots):
        sol[col] = M[r][ncols]
    return sol


def central_elements(A):
    """The degree zero elements Xi_bdry = sum x_i y_i and
    Xi_gen = sum (-1)^{|x_j||y_i|} x_i x_j y_i y_j."""
    ginv = A.pairing_inverse()
    if ginv is None:
        raise ValueError("degenerate trace pairing")
    n = A.dim
    xi_bdry = [Fraction(0)] * n
    for a in range(n):
        for b in range(n):
            if ginv[a][b]:
                prod = A.product(A.basis_vector(a), A.basis_vector(b))
                for x in range(n):
                    xi_bdry[x] += ginv[a][b] * prod[x]
    xi_gen = [Fraction(0)] * n
    for a in range(n):
        for b in range(n):
            if not ginv[a][b]:
                continue
            for c in range(n):
                for e in range(n):
                    if not ginv[c][e]:
                        continue
                    coeff = ginv[a][b] * ginv[c][e]
                    if A.parity(c) & A.parity(b):
                        coeff = -coeff
                    prod = A.product(
                        A.product(A.basis_vector(a), A.basis_vector(c)),
                        A.product(A.basis_vector(b), A.basis_vector(e)))
                    for x in range(n):
                        xi_gen[x] += coeff * prod[x]
    return xi_bdry, xi_gen


def validate_frobenius(A):
    """Diagnostic check of the Frobenius axioms.

    Returns (violations, Xi_bdry, Xi_gen) where the Xi's are the
    degree zero central elements built from the inverse pairing
    (None when the pairing has no inverse).
    """
    errs = []
    n = A.dim
    for a in range(n):
        for b in range(n):
            for c in range(n):
                lhs = A.product(A.product(A.basis_vector(a),
                                          A.basis_vector(b)),
                                A.basis_vector(c))
                rhs = A.product(A.basis_vector(a),
                                A.product(A.basis_vector(b),
                                          A.basis_vector(c)))
                if lhs != rhs:
                    errs.append("not associative at (%d,%d,%d)" % (a, b, c))
    if A.unit() is None:
        errs.append("no unit")
    for c in range(n):
        if A.trace[c] != 0 and A.degrees[c] != 0:
            errs.append("trace not degree zero on %s" % A.basis[c])
    ginv = A.pairing_inverse()
    if ginv is None:
        errs.append("no inverse pairing")
        return errs, None, None
    # duality: a = sum_i Tr(a x_i) y_i against the trace-induced pairing
    for c in range(n):
        rec = [Fraction(0)] * n
        for a in range(n):
            t = A.trace_of(A.product(A.basis_vector(c), A.basis_vector(a)))
            if not t:
                continue
            for b in range(n):
                rec[b] += t * ginv[a][b]
        if rec != A.basis_vector(c):
            errs.append("pairing inverse fails duality on %s" % A.basis[c])
    xi_bdry, xi_gen = central_elements(A)
    for name, xi in (("Xi_bdry", xi_bdry), ("Xi_gen", xi_gen)):
        for z in range(n):
            zv = A.basis_vector(z)
            if A.product(xi, zv) != A.product(zv, xi):
                errs.append("%s not central against %s" % (name, A.basis[z]))
                break
    if A.d is not None:
        D = [[Fraction(c) for c in row] for row in A.d]
        dvec = lambda u: [sum((D[i][j] * u[j] for j in range(n)),
                              Fraction(0)) for i in range(n)]
        for i in range(n):
            for j in range(n):
                if D[i][j] and A.degrees[i] != A.degrees[j] + 1:
                    errs.append("differential not degree one")
        for j in range(n):
            col = [D[i][j] for i in range(n)]
            if any(x != 0 for x in dvec(col)):
                errs.append("differential does not square to zero")
                break
        for j in range(n):
            if sum((A.trace[i] * D[i][j] for i in range(n)), Fraction(0)):
                errs.append("trace not closed under the differential")
                break
        for a in range(n):
            for b in range(n):
                ea, eb = A.basis_vector(a), A.basis_vector(b)
                lhs = dvec(A.product(ea, eb))
                rhs = A.product(dvec(ea), eb)
                second = A.product(ea, dvec(eb))
                s = -1 if A.parity(a) else 1
                rhs = [x + s * y for x, y in zip(rhs, second)]
                if lhs != rhs:
                    errs.append("differential not a derivation at (%d,%d)"
                                % (a, b))
    return errs, xi_bdry, xi_gen


def matrix_frobenius(N):
    """The matrix algebra mat_N with the matrix trace."""
    if N < 1:
        raise ValueError("matrix size must be positive")
    labels = ["E%d%d" % (i + 1, j + 1) for i in range(N) for j in range(N)]
    n = N * N
    idx = lambda i, j: i * N + j
    mult = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(N):
        for j in range(N):
            for k in range(N):
                for l in range(N):
                    if j == k:
                        mult[idx(i, j)][idx(k, l)][idx(i, l)] = Fraction(1)
    trace = [Fraction(int(i == j)) for i in range(N) for j in range(N)]
    return FrobeniusAlgebra(labels, [0] * n, mult, trace)


def ground_field():
    """The one-dimensional Frobenius algebra K."""
    return matrix_frobenius(1)


def otft_Z(A, g, b, args):
    """Open-TFT amplitude Z^{g,b}_{r_1..r_k} of the Frobenius algebra.

    args is a sequence of k nonempty groups of algebra elements, each
    element a basis index or a coefficient vector.  The amplitude is
    the double-trace state sum over the inverse pairing with boundary
    and genus insertions Xi_bdry^b Xi_gen^g.
    """
    if g < 0 or b < 0:
        raise ValueError("genus and boundary counts must be nonnegative")
    groups = []
    for grp in args:
        if not grp:
            raise ValueError("boundary groups must be nonempty")
        vec = []
        for el in grp:
            vec.append(A.basis_vector(el) if isinstance(el, int)
                       else [Fraction(c) for c in el])
        groups.append(vec)
    ginv = A.pairing_inverse()
    if ginv is None:
        raise ValueError("degenerate trace pairing")
    xi_bdry, xi_gen = central_elements(A)
    ins = A.unit()
    if ins is None:
        raise ValueError("algebra has no unit")
    for _ in range(b):
        ins = A.product(ins, xi_bdry)
    for _ in range(g):
        ins = A.product(ins, xi_gen)
    n = A.dim
    k = len(groups)
    gprods = [_left_product(A, grp) for grp in groups]
    gpar = [sum(A.degrees[x] for x, c in enumerate(v) if c) & 1
            for v in gprods]
    total = Fraction(0)
    for pairs in product(range(n), range(n), repeat=k):
        xs = pairs[0::2]
        ys = pairs[1::2]
        coeff = Fraction(1)
        for x, y in zip(xs, ys):
            coeff *= ginv[x][y]
            if coeff == 0:
                break
        if coeff == 0:
            continue
        # Tr(x_{i_k} ... x_{i_1})
        left = A.basis_vector(xs[k - 1])
        for t in range(k - 2, -1, -1):
            left = A.product(left, A.basis_vector(xs[t]))
        tl = A.trace_of(left)
        if tl == 0:
            continue
        # Koszul sign from moving each y_{i_s} left past earlier groups
        sign = 1
        for s in range(1, k):
            if A.parity(ys[s]) and sum(gpar[:s]) & 1:
                sign = -sign
        right = ins
        for t in range(k):
            right = A.product(right, A.basis_vector(ys[t]))
            right = A.product(right, gprods[t])
        total += sign * coeff * tl * A.trace_of(right)
    return total


def _left_product(A, vecs):
    out = vecs[0]
    for v in vecs[1:]:
        out = A.product(out, v)
    return out


def extended_basis(basis, A):
    """Tensor-product basis on E (x) A, letters ordered E-major."""
    letters = ["%s|%s" % (v, a) for v in basis.letters for a in A.basis]
    degrees = [basis.degrees[i] + A.degrees[x]
               for i in range(len(basis.letters)) for x in range(A.dim)]
    return GradedBasis(letters, degrees)


def extend_kernel(K, m, A):
    """The kernel K (x) <,>_A^{-1} on the extended model."""
    ginv = A.pairing_inverse()
    if ginv is None:
        raise ValueError("degenerate trace pairing")
    nE, nA = m.dim, A.dim
    n = nE * nA
    parE = m.basis.parity
    T = [[Fraction(0)] * n for _ in range(n)]
    for v1 in range(nE):
        for v2 in range(nE):
            if not K.tensor[v1][v2]:
                continue
            for a1 in range(nA):
                for a2 in range(nA):
                    if not ginv[a1][a2]:
                        continue
                    s = -1 if (A.parity(a1) & parE(v2)) else 1
                    T[v1 * nA + a1][v2 * nA + a2] = \
                        s * K.tensor[v1][v2] * ginv[a1][a2]
    return Kernel(T, K.degree, K.symmetric)


def morita(I, A):
    """Morita transform to the extended model: each cyclic-word term is
    tensored with the matching open-TFT amplitude Z^{i,j}."""
    nA = A.dim
    ext = extended_basis(I.basis, A)
    out = NCFunctional(ext, I.p_max, I.l_max)
    parE = I.basis.parity
    zcache = {}
    for (i, j, ws), c in I.terms.items():
        if not ws:
            raise ValueError("constant terms carry no boundary data")
        letters = [x for w in ws for x in w]
        lens = [len(w) for w in ws]
        l = len(letters)
        for alpha in product(range(nA), repeat=l):
            key = (i, j, tuple(lens), alpha)
            if key not in zcache:
                groups, pos = [], 0
                for r in lens:
                    groups.append(list(alpha[pos:pos + r]))
                    pos += r
                zcache[key] = otft_Z(A, i, j, groups)
            z = zcache[key]
            if z == 0:
                continue
            # interleaving (E-dual)^l (x) (A-dual)^l into the product duals
            sign = 1
            seen = 0
            for u in range(l):
                if A.parity(alpha[u]) and seen & 1:
                    sign = -sign
                seen += parE(letters[u])
            new_ws, pos = [], 0
            for w in ws:
                new_ws.append(tuple(w[s] * nA + alpha[pos + s]
                                    for s in range(len(w))))
                pos += len(w)
            out.add_term(i, j, new_ws, sign * z * c)
    return out


def sigma_gamma_nu(I):
    """Quotient from cyclic to symmetric words, recording the filtration
    level as the power of hbar."""
    out = CommFunctional(I.basis, I.p_max, I.l_max)
    for (i, j, ws), c in I.terms.items():
        e = 2 * i + j + len(ws) - 1
        if e < 0:
            raise ValueError("constant term would need a negative power")
        out.add_term(e, [x for w in ws for x in w], c)
    return out


def lqt_witness(I, N_max):
    """Least N <= N_max whose matrix image is nonzero, or None.

    The functional is zero precisely when every matrix image vanishes,
    so a witness certifies nonvanishing."""
    if N_max < 1:
        raise ValueError("witness bound must be positive")
    for N in range(1, N_max + 1):
        if not sigma_gamma_nu(morita(I, matrix_frobenius(N))).is_zero():
            return N
    return None


def powerseries_substitute(p, N):
    """Substitute gamma = hbar^2, nu = N hbar and divide by hbar.

    p is a map (i, j) -> coefficient; the result maps hbar exponents to
    coefficients."""
    if N < 1:
        raise ValueError("matrix size must be positive")
    out = {}
    for (i, j), c in p.items():
        c = Fraction(c)
        if c == 0:
            continue
        e = 2 * i + j - 1
        if e < 0:
            raise ValueError("constant term would need a negative power")
        val = out.get(e, Fraction(0)) + c * Fraction(N) ** j
        if val == 0:
            out.pop(e, None)
        else:
            out[e] = val
    return out
