"""Finite-dimensional free BV models.

A model is a graded basis with a degree minus-one skew pairing, a
square-zero degree one differential Q and an optional gauge fixing
operator QGF (degree minus-one, square-zero, self-adjoint).  Heat
kernels and propagators are computed in binary64 via diagonalization
of H = [Q, QGF]; exact synthetic homotopy triples provide a rational
substitute for all algebraic identities.
"""

from dataclasses import dataclass
from fractions import Fraction
import math
import random

import numpy as np

from .tensor import GradedBasis, NCFunctional


# -- small exact matrix helpers -------------------------------------------

def zeros(n):
    return [[Fraction(0)] * n for _ in range(n)]


def matmul(A, B):
    n = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(n)), Fraction(0))
             for j in range(n)] for i in range(n)]


def madd(A, B, c=1):
    n = len(A)
    return [[A[i][j] + c * B[i][j] for j in range(n)] for i in range(n)]


def is_zero_matrix(A):
    return all(x == 0 for row in A for x in row)


def invert(A):
    """Exact inverse by Gauss-Jordan; None if singular."""
    n = len(A)
    M = [[Fraction(A[i][j]) for j in range(n)] + [Fraction(int(i == j))
         for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [x / p for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [row[n:] for row in M]


# -- kernels ---------------------------------------------------------------

@dataclass
class Kernel:
    """Element of E (x) E as a coefficient matrix K[a][b] on e_a (x) e_b."""
    tensor: list
    degree: int
    symmetric: bool = True

    def entries(self):
        out = []
        for a, row in enumerate(self.tensor):
            for b, x in enumerate(row):
                if x:
                    out.append((a, b, x))
        return out

    def scale(self, c):
        return Kernel([[x * c for x in row] for row in self.tensor],
                      self.degree, self.symmetric)

    def __add__(self, other):
        if self.degree != other.degree:
            raise ValueError("kernel degree mismatch")
        return Kernel(madd(self.tensor, other.tensor), self.degree,
                      self.symmetric and other.symmetric)

    def __sub__(self, other):
        return self + other.scale(-1)


@dataclass
class HomotopyTriple:
    K_eps: Kernel
    K_L: Kernel
    P: Kernel


class FreeBVModel:
    """Finite free BV model over exact rationals."""

    def __init__(self, basis, pairing, Q, QGF=None):
        self.basis = basis
        n = basis.dim
        self.pairing = [[Fraction(x) for x in row] for row in pairing]
        self.Q = [[Fraction(x) for x in row] for row in Q]
        self.QGF = None if QGF is None else [[Fraction(x) for x in row] for row in QGF]
        if len(self.pairing) != n or len(self.Q) != n:
            raise ValueError("matrix dimension mismatch")

    @property
    def dim(self):
        return self.basis.dim

    @property
    def H(self):
        if self.QGF is None:
            return None
        return madd(matmul(self.Q, self.QGF), matmul(self.QGF, self.Q))

    def pair(self, a, b):
        return self.pairing[a][b]

    def pairing_inverse(self):
        inv = invert(self.pairing)
        if inv is None:
            raise ValueError("degenerate pairing")
        return inv

    def kernel_symmetry_ok(self, K):
        """(tau (x) 1)[K] = K with the graded transposition sign."""
        n = self.dim
        par = self.basis.parity
        for a in range(n):
            for b in range(n):
                s = -1 if par(a) & par(b) else 1
                if K.tensor[b][a] != s * K.tensor[a][b]:
                    return False
        return True

    def kernel_degree_ok(self, K):
        for a, b, x in K.entries():
            if self.basis.degree(a) + self.basis.degree(b) != K.degree:
                return False
        return True

    def differential_on_kernel(self, K):
        """(Q (x) 1 + 1 (x) Q) K with the Koszul sign on the second slot."""
        n = self.dim
        out = zeros(n)
        par = self.basis.parity
        for a, b, x in K.entries():
            for c in range(n):
                if self.Q[c][a]:
                    out[c][b] += self.Q[c][a] * x
                if self.Q[c][b]:
                    s = -1 if par(a) else 1
                    out[a][c] += s * self.Q[c][b] * x
        return Kernel(out, K.degree + 1, K.symmetric)

    def identity_kernel(self):
        """K0 with K0* = identity: K0[a][b] = -(-1)^{|e_a|} (g^{-1})[a][b]."""
        inv = self.pairing_inverse()
        n = self.dim
        par = self.basis.parity
        return Kernel([[(1 if par(a) else -1) * inv[a][b]
                        for b in range(n)] for a in range(n)], 1)

    def __repr__(self):
        return "FreeBVModel(dim=%d)" % self.dim


# -- validation ------------------------------------------------------------

def validate_model(m):
    errs = []
    n = m.dim
    deg = m.basis.degree
    par = m.basis.parity
    g = m.pairing
    for a in range(n):
        for b in range(n):
            if g[a][b] and deg(a) + deg(b) != 1:
                errs.append("pairing not of degree -1 at (%d,%d)" % (a, b))
            s = -1 if par(a) & par(b) else 1
            if g[b][a] != -s * g[a][b]:
                errs.append("pairing not graded skew at (%d,%d)" % (a, b))
    if invert(g) is None:
        errs.append("degenerate pairing")
    for a in range(n):
        for b in range(n):
            if m.Q[a][b] and deg(a) != deg(b) + 1:
                errs.append("Q not of degree +1 at (%d,%d)" % (a, b))
    if not is_zero_matrix(matmul(m.Q, m.Q)):
        errs.append("Q^2 != 0")
    # <Qa,b> + (-1)^{|a|} <a,Qb> = 0
    for a in range(n):
        for b in range(n):
            lhs = sum((m.Q[c][a] * g[c][b] for c in range(n)), Fraction(0))
            rhs = sum((g[a][c] * m.Q[c][b] for c in range(n)), Fraction(0))
            if lhs + (-1 if par(a) else 1) * rhs != 0:
                errs.append("Q not skew self-adjoint at (%d,%d)" % (a, b))
    if m.QGF is not None:
        for a in range(n):
            for b in range(n):
                if m.QGF[a][b] and deg(a) != deg(b) - 1:
                    errs.append("QGF not of degree -1 at (%d,%d)" % (a, b))
        if not is_zero_matrix(matmul(m.QGF, m.QGF)):
            errs.append("(QGF)^2 != 0")
        for a in range(n):
            for b in range(n):
                lhs = sum((m.QGF[c][a] * g[c][b] for c in range(n)), Fraction(0))
                rhs = sum((g[a][c] * m.QGF[c][b] for c in range(n)), Fraction(0))
                if lhs - (-1 if par(a) else 1) * rhs != 0:
                    errs.append("QGF not self-adjoint at (%d,%d)" % (a, b))
        H = m.H
        HQ = madd(matmul(m.Q, H), matmul(H, m.Q), -1)
        if not is_zero_matrix(HQ):
            errs.append("[Q,H] != 0")
        HG = madd(matmul(m.QGF, H), matmul(H, m.QGF), -1)
        if not is_zero_matrix(HG):
            errs.append("[QGF,H] != 0")
    return sorted(set(errs))


# -- convolution -----------------------------------------------------------

def convolve(m, K, s):
    """K * s = (-1)^{|K|} (1 (x) <,>)[K (x) s] as a coordinate vector."""
    n = m.dim
    if len(s) != n:
        raise ValueError("dimension mismatch")
    sign = -1 if K.degree & 1 else 1
    par = m.basis.parity
    res = [None] * n
    for a in range(n):
        acc = 0
        for b in range(n):
            if K.tensor[a][b]:
                inner = sum(m.pairing[b][c] * s[c] for c in range(n))
                acc = acc + K.tensor[a][b] * inner
        # the odd pairing passes the first slot of K
        res[a] = sign * (-1 if par(a) else 1) * acc
    return res


# -- heat kernels and propagators (binary64 backend) ------------------------

def _eig_data(m):
    H = np.array([[float(x) for x in row] for row in m.H])
    vals, vecs = np.linalg.eig(H)
    if np.max(np.abs(vals.imag)) > 1e-9:
        raise ValueError("H has non-real eigenvalues")
    vals = vals.real
    vecs = vecs.real
    if np.linalg.cond(vecs) > 1e8:
        raise ValueError("H is not diagonalizable (ill-conditioned eigenbasis)")
    return vals, vecs, np.linalg.inv(vecs)


def heat_propagator(m, eps, L):
    """(K_eps, K_L, P) for the heat flow of H = [Q, QGF].

    L may be math.inf, in which case QGF must vanish on ker H and all
    eigenvalues must be nonnegative.
    """
    if m.QGF is None:
        raise ValueError("model has no gauge fixing operator")
    vals, V, Vinv = _eig_data(m)
    n = m.dim
    K0 = np.array([[float(x) for x in row] for row in m.identity_kernel().tensor])
    QGF = np.array([[float(x) for x in row] for row in m.QGF])

    def expH(t):
        return (V * np.exp(-t * vals)) @ Vinv

    def kernel_at(t):
        return Kernel((expH(t) @ K0).tolist(), 1)

    K_eps = kernel_at(eps)
    if L == math.inf:
        if np.min(vals) < -1e-9:
            raise ValueError("negative eigenvalues: no L = infinity limit")
        proj0 = (V * (np.abs(vals) < 1e-9)) @ Vinv
        if np.max(np.abs(QGF @ proj0)) > 1e-9:
            raise ValueError("QGF does not vanish on ker H")
        K_L = Kernel((proj0 @ K0).tolist(), 1)
        coeff = np.where(np.abs(vals) < 1e-9, 0.0, np.exp(-eps * vals) / np.where(np.abs(vals) < 1e-9, 1.0, vals))
        F = (V * coeff) @ Vinv
        P = Kernel((QGF @ F @ K0).tolist(), 0)
        return K_eps, K_L, P
    K_L = kernel_at(L)
    small = np.abs(vals) < 1e-12
    safe = np.where(small, 1.0, vals)
    coeff = np.where(small, L - eps, (np.exp(-eps * vals) - np.exp(-L * vals)) / safe)
    F = (V * coeff) @ Vinv
    P = Kernel((QGF @ F @ K0).tolist(), 0)
    return K_eps, K_L, P


# -- exact synthetic triples -------------------------------------------------

def _random_symmetric_kernel(m, degree, rng):
    n = m.dim
    deg = m.basis.degree
    par = m.basis.parity
    K = zeros(n)
    for a in range(n):
        for b in range(a, n):
            if deg(a) + deg(b) != degree:
                continue
            if a == b and par(a):
                continue  # graded symmetry kills odd diagonal entries
            x = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
            K[a][b] = x
            K[b][a] = (-1 if par(a) & par(b) else 1) * x
    return Kernel(K, degree, True)


def synthetic_homotopy_triple(m, seed):
    """Exact homotopy triple: P symmetric degree 0, K_eps a symmetric
    degree 1 Q-cycle (constructed as a Q-boundary), and
    K_L = K_eps - (Q (x) 1 + 1 (x) Q)P."""
    rng = random.Random(seed)
    P = _random_symmetric_kernel(m, 0, rng)
    R = _random_symmetric_kernel(m, 0, rng)
    K_eps = m.differential_on_kernel(R)
    K_L = K_eps - m.differential_on_kernel(P)
    return HomotopyTriple(K_eps=K_eps, K_L=K_L, P=P)


def validate_triple(m, t):
    errs = []
    for name, K, d in (("K_eps", t.K_eps, 1), ("K_L", t.K_L, 1), ("P", t.P, 0)):
        if K.degree != d:
            errs.append("%s has wrong degree tag" % name)
        if not m.kernel_degree_ok(K):
            errs.append("%s entries off-degree" % name)
        if not m.kernel_symmetry_ok(K):
            errs.append("%s not symmetric" % name)
    if not is_zero_matrix(m.differential_on_kernel(t.K_eps).tensor):
        errs.append("K_eps not a Q-cycle")
    lhs = m.differential_on_kernel(t.P)
    if not is_zero_matrix((lhs - (t.K_eps - t.K_L)).tensor):
        errs.append("homotopy identity fails")
    return errs


# -- Frobenius tensor extension ----------------------------------------------

def tensor_extend_model(m, A):
    """Model on E (x) A with pairing <v1 a1, v2 a2> =
    (-1)^{|a1||v2|} <v1,v2> Tr(a1 a2), Q_A = Q (x) 1 + 1 (x) d_A."""
    nE = m.dim
    nA = len(A.basis)
    letters = ["%s|%s" % (v, a) for v in m.basis.letters for a in A.basis]
    degrees = [m.basis.degrees[i] + A.degrees[x]
               for i in range(nE) for x in range(nA)]
    basis = GradedBasis(letters, degrees)
    n = nE * nA
    pairing = zeros(n)
    trace_form = A.pairing_matrix()
    parE = m.basis.parity
    parA = lambda x: A.degrees[x] & 1
    for v1 in range(nE):
        for a1 in range(nA):
            for v2 in range(nE):
                for a2 in range(nA):
                    s = -1 if parA(a1) & parE(v2) else 1
                    pairing[v1 * nA + a1][v2 * nA + a2] = \
                        s * m.pairing[v1][v2] * trace_form[a1][a2]
    Q = zeros(n)
    for v1 in range(nE):
        for v2 in range(nE):
            if m.Q[v1][v2]:
                for a in range(nA):
                    Q[v1 * nA + a][v2 * nA + a] += m.Q[v1][v2]
    if A.d is not None:
        for v in range(nE):
            s = -1 if parE(v) else 1
            for a1 in range(nA):
                for a2 in range(nA):
                    if A.d[a1][a2]:
                        Q[v * nA + a1][v * nA + a2] += s * Fraction(A.d[a1][a2])
    QGF = None
    if m.QGF is not None:
        QGF = zeros(n)
        for v1 in range(nE):
            for v2 in range(nE):
                if m.QGF[v1][v2]:
                    for a in range(nA):
                        QGF[v1 * nA + a][v2 * nA + a] += m.QGF[v1][v2]
    return FreeBVModel(basis, pairing, Q, QGF)


# -- kinetic term ------------------------------------------------------------

def kinetic_functional(m, p_max=2, l_max=6):
    """The quadratic Hamiltonian representing (1/2) <Q s, s>.

    Its symmetrized evaluation on (u, v) equals <Q u, v>; together with
    the Hamiltonian correspondence this makes its vector field equal Q.
    """
    from .tensor import evaluate_component
    n = m.dim
    par = m.basis.parity
    out = NCFunctional(m.basis, p_max, l_max)
    q = [[sum((m.Q[c][a] * m.pairing[c][b] for c in range(n)), Fraction(0))
          for b in range(n)] for a in range(n)]   # q[a][b] = <Q e_a, e_b>
    for a in range(n):
        for b in range(n):
            if q[a][b]:
                s = -1 if par(a) & par(b) else 1
                out.add_term(0, 0, [(a, b)], Fraction(1, 2) * q[a][b] * s)
    # pin the normalization against the defining identity
    for a in range(n):
        for b in range(n):
            assert evaluate_component(out, 0, 0, 1, (a, b)) == q[a][b]
    return out
