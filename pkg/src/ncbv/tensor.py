"""Exact graded multilinear algebra: Koszul signs, cyclic words,
symmetric products of cyclic words, and truncated formal series in the
genus/boundary variables (gamma, nu) or the loop variable hbar.

All coefficients are exact rationals.  The only axiomatic sign rule is
the graded transposition v (x) w -> (-1)^{|v||w|} w (x) v; every
composite sign is obtained by mechanical bookkeeping from it.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
import json


# -- Koszul bookkeeping ----------------------------------------------------

def perm_sign(parities, perm):
    """Sign of rearranging graded objects into the order given by perm.

    perm[t] is the original position of the object landing in slot t;
    the sign counts inversions between odd objects.
    """
    sign = 1
    for t in range(len(perm)):
        for u in range(t + 1, len(perm)):
            if perm[t] > perm[u] and parities[perm[t]] & parities[perm[u]] & 1:
                sign = -sign
    return sign


def rotation_sign(parities, r):
    """Sign of rotating (a_0 .. a_{n-1}) to (a_r .. a_{n-1} a_0 .. a_{r-1})."""
    n = len(parities)
    r %= n if n else 1
    head = sum(parities[:r]) & 1
    tail = sum(parities[r:]) & 1
    return -1 if head and tail else 1


def eval_sign(parities):
    """Sign of evaluating a dual elementary tensor slotwise on inputs of
    the given parities: (f1 (x) .. (x) fl)(s1, .., sl) = sign * prod ft(st),
    with sign (-1)^{sum_{t<u} |s_t||f_u|} and |f_u| = |s_u|."""
    nodd = sum(1 for p in parities if p & 1)
    pairs = nodd * (nodd - 1) // 2
    return -1 if pairs & 1 else 1


class GradedBasis:
    """Ordered graded basis; letters are referred to by index."""

    def __init__(self, letters, degrees):
        letters = list(letters)
        if len(set(letters)) != len(letters):
            raise ValueError("duplicate letters")
        self.letters = letters
        if isinstance(degrees, dict):
            self.degrees = [int(degrees[x]) for x in letters]
        else:
            self.degrees = [int(d) for d in degrees]
        if len(self.degrees) != len(letters):
            raise ValueError("degree list length mismatch")
        self.index = {x: i for i, x in enumerate(letters)}

    @property
    def dim(self):
        return len(self.letters)

    def degree(self, i):
        return self.degrees[i]

    def parity(self, i):
        return self.degrees[i] & 1

    def parities(self, word):
        return [self.degrees[i] & 1 for i in word]

    def __eq__(self, other):
        return (isinstance(other, GradedBasis) and self.letters == other.letters
                and self.degrees == other.degrees)

    def __repr__(self):
        return "GradedBasis(%r)" % list(zip(self.letters, self.degrees))


@dataclass(frozen=True)
class CyclicWord:
    letters: tuple
    coefficient: Fraction


def cyclic_canonicalize(basis, letters, coeff=Fraction(1)):
    """Canonical rotation of a cyclic word; None when it vanishes.

    The canonical representative is the lexicographically least rotation;
    the Koszul rotation sign is absorbed into the coefficient.  If some
    rotation fixes the word with sign -1 the word is zero.
    """
    letters = tuple(letters)
    if not letters:
        raise ValueError("empty word")
    pars = basis.parities(letters)
    n = len(letters)
    rots = []
    for r in range(n):
        rots.append((letters[r:] + letters[:r], rotation_sign(pars, r)))
    least = min(t for t, _ in rots)
    signs = {s for t, s in rots if t == least}
    if len(signs) == 2:
        return None
    coeff = Fraction(coeff) * signs.pop()
    if coeff == 0:
        return None
    return CyclicWord(least, coeff)


def word_parity(basis, word):
    return sum(basis.degrees[i] for i in word) & 1


def word_degree(basis, word):
    # degree of the dual word as a functional
    return -sum(basis.degrees[i] for i in word)


def sort_words(basis, words):
    """Sort a list of canonical words, tracking the Koszul sign.

    Returns (sorted tuple, sign) or (None, 0) when two equal odd words
    force the term to vanish.
    """
    words = list(words)
    pars = [word_parity(basis, w) for w in words]
    sign = 1
    # insertion sort with graded transposition signs
    for i in range(1, len(words)):
        j = i
        while j > 0 and words[j - 1] > words[j]:
            if pars[j - 1] & pars[j] & 1:
                sign = -sign
            words[j - 1], words[j] = words[j], words[j - 1]
            pars[j - 1], pars[j] = pars[j], pars[j - 1]
            j -= 1
    for a, b, p in zip(words, words[1:], pars):
        if a == b and p & 1:
            return None, 0
    return tuple(words), sign


class NCFunctional:
    """Truncated formal series sum_{i,j} gamma^i nu^j I_{ijk} where the
    I_{ijk} are rational combinations of unordered products of k cyclic
    words.  Terms are keyed by (i, j, sorted word tuple)."""

    def __init__(self, basis, p_max, l_max):
        self.basis = basis
        self.p_max = int(p_max)
        self.l_max = int(l_max)
        self.terms = {}

    def copy(self):
        out = NCFunctional(self.basis, self.p_max, self.l_max)
        out.terms = dict(self.terms)
        return out

    def _fits(self, i, j, words):
        k = len(words)
        if i == 0 and j == 0 and k == 0:
            return False      # pure scalars are excluded from the space
        if 2 * i + j + k - 1 > self.p_max:
            return False
        if sum(len(w) for w in words) > self.l_max:
            return False
        return True

    def add_term(self, i, j, words, coeff):
        """Accumulate coeff * gamma^i nu^j * (product of words); the words
        need not be canonical.  Terms outside the truncation are dropped."""
        coeff = Fraction(coeff)
        if coeff == 0:
            return self
        canon = []
        for w in words:
            cw = cyclic_canonicalize(self.basis, w)
            if cw is None:
                return self
            coeff *= cw.coefficient
            canon.append(cw.letters)
        key_words, sign = sort_words(self.basis, canon)
        if key_words is None:
            return self
        coeff *= sign
        if not self._fits(i, j, key_words):
            return self
        key = (i, j, key_words)
        new = self.terms.get(key, Fraction(0)) + coeff
        if new == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = new
        return self

    # -- ring structure --

    def __add__(self, other):
        self._check(other)
        out = self.copy()
        for (i, j, ws), c in other.terms.items():
            out.add_term(i, j, ws, c)
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        out = NCFunctional(self.basis, self.p_max, self.l_max)
        if c != 0:
            out.terms = {k: v * c for k, v in self.terms.items()}
        return out

    def multiply(self, other):
        self._check(other)
        out = NCFunctional(self.basis, self.p_max, self.l_max)
        for (i1, j1, ws1), c1 in self.terms.items():
            for (i2, j2, ws2), c2 in other.terms.items():
                out.add_term(i1 + i2, j1 + j2, ws1 + ws2, c1 * c2)
        return out

    def _check(self, other):
        if self.basis != other.basis:
            raise ValueError("basis mismatch")
        if (self.p_max, self.l_max) != (other.p_max, other.l_max):
            raise ValueError("truncation mismatch")

    def __eq__(self, other):
        return (isinstance(other, NCFunctional) and self.basis == other.basis
                and self.terms == other.terms)

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return "NCFunctional(0)"
        bits = []
        for (i, j, ws) in sorted(self.terms):
            c = self.terms[(i, j, ws)]
            word_str = "".join("(%s)" % " ".join(self.basis.letters[x] for x in w)
                               for w in ws) or "1"
            bits.append("%s g^%d n^%d %s" % (c, i, j, word_str))
        return "NCFunctional[" + " + ".join(bits) + "]"

    # -- structure queries --

    def filtration_component(self, n):
        """The part I_[n] with 2i+j+k-1 = n."""
        out = NCFunctional(self.basis, self.p_max, self.l_max)
        for (i, j, ws), c in self.terms.items():
            if 2 * i + j + len(ws) - 1 == n:
                out.terms[(i, j, ws)] = c
        return out

    def filtration_from(self, n):
        """The part with 2i+j+k-1 >= n (lies in F_n)."""
        out = NCFunctional(self.basis, self.p_max, self.l_max)
        for (i, j, ws), c in self.terms.items():
            if 2 * i + j + len(ws) - 1 >= n:
                out.terms[(i, j, ws)] = c
        return out

    def component(self, i, j, k=None, l=None):
        """Terms with fixed gamma/nu powers and optionally fixed word
        count k and total length l."""
        out = NCFunctional(self.basis, self.p_max, self.l_max)
        for (i2, j2, ws), c in self.terms.items():
            if i2 != i or j2 != j:
                continue
            if k is not None and len(ws) != k:
                continue
            if l is not None and sum(len(w) for w in ws) != l:
                continue
            out.terms[(i2, j2, ws)] = c
        return out

    def constants_part(self):
        """Terms with no word factors (the constants subspace)."""
        out = NCFunctional(self.basis, self.p_max, self.l_max)
        for (i, j, ws), c in self.terms.items():
            if not ws:
                out.terms[(i, j, ws)] = c
        return out

    def modulo_constants(self):
        out = NCFunctional(self.basis, self.p_max, self.l_max)
        for (i, j, ws), c in self.terms.items():
            if ws:
                out.terms[(i, j, ws)] = c
        return out

    def degree_of_term(self, key):
        i, j, ws = key
        return sum(word_degree(self.basis, w) for w in ws)

    def is_homogeneous(self, degree=0):
        return all(self.degree_of_term(k) == degree for k in self.terms)

    def is_interaction(self):
        """Degree zero, no pure-scalar terms, and every component with
        2(2i+j+k-1)+l < 3 vanishes."""
        if not self.is_homogeneous(0):
            return False
        for (i, j, ws) in self.terms:
            k = len(ws)
            l = sum(len(w) for w in ws)
            if 2 * (2 * i + j + k - 1) + l < 3:
                return False
        return True

    def shapes(self):
        """Vertex shapes (genus, boundary, cycle lengths) present in the
        series, for driving graph enumeration."""
        out = set()
        for (i, j, ws) in self.terms:
            out.add((i, j, tuple(sorted((len(w) for w in ws), reverse=True))))
        return out

    # -- serialization --

    def to_json(self):
        terms = []
        for (i, j, ws) in sorted(self.terms):
            c = self.terms[(i, j, ws)]
            terms.append({"gamma": i, "nu": j, "coeff": "%d/%d" % (c.numerator, c.denominator),
                          "words": [[self.basis.letters[x] for x in w] for w in ws]})
        return json.dumps({"truncation": {"p": self.p_max, "l": self.l_max},
                           "terms": terms})

    @classmethod
    def from_json(cls, basis, text):
        data = json.loads(text)
        out = cls(basis, data["truncation"]["p"], data["truncation"]["l"])
        for t in data["terms"]:
            words = [tuple(basis.index[x] for x in w) for w in t["words"]]
            out.add_term(t["gamma"], t["nu"], words, Fraction(t["coeff"]))
        return out


class CommFunctional:
    """Truncated series sum_i hbar^i I_i with I_i a rational combination
    of symmetric monomials in the dual letters."""

    def __init__(self, basis, p_max, l_max):
        self.basis = basis
        self.p_max = int(p_max)
        self.l_max = int(l_max)
        self.terms = {}

    def copy(self):
        out = CommFunctional(self.basis, self.p_max, self.l_max)
        out.terms = dict(self.terms)
        return out

    def add_term(self, i, mono, coeff):
        coeff = Fraction(coeff)
        if coeff == 0:
            return self
        mono = list(mono)
        if len(mono) > self.l_max or i > self.p_max:
            return self
        pars = [self.basis.parity(x) for x in mono]
        sign = 1
        for a in range(1, len(mono)):
            b = a
            while b > 0 and mono[b - 1] > mono[b]:
                if pars[b - 1] & pars[b] & 1:
                    sign = -sign
                mono[b - 1], mono[b] = mono[b], mono[b - 1]
                pars[b - 1], pars[b] = pars[b], pars[b - 1]
                b -= 1
        for a, b, p in zip(mono, mono[1:], pars):
            if a == b and p & 1:
                return self
        key = (i, tuple(mono))
        new = self.terms.get(key, Fraction(0)) + coeff * sign
        if new == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = new
        return self

    def __add__(self, other):
        out = self.copy()
        for (i, m), c in other.terms.items():
            out.add_term(i, m, c)
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        out = CommFunctional(self.basis, self.p_max, self.l_max)
        if c != 0:
            out.terms = {k: v * c for k, v in self.terms.items()}
        return out

    def multiply(self, other):
        out = CommFunctional(self.basis, self.p_max, self.l_max)
        for (i1, m1), c1 in self.terms.items():
            for (i2, m2), c2 in other.terms.items():
                out.add_term(i1 + i2, m1 + m2, c1 * c2)
        return out

    def __eq__(self, other):
        return (isinstance(other, CommFunctional) and self.basis == other.basis
                and self.terms == other.terms)

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return "CommFunctional(0)"
        bits = []
        for (i, m) in sorted(self.terms):
            c = self.terms[(i, m)]
            bits.append("%s h^%d %s" % (c, i,
                        " ".join(self.basis.letters[x] for x in m) or "1"))
        return "CommFunctional[" + " + ".join(bits) + "]"

    def shapes(self):
        """Vertex shapes (loop number, size) present in the series."""
        return {(i, len(m)) for (i, m) in self.terms}

    def to_json(self):
        terms = []
        for (i, m) in sorted(self.terms):
            c = self.terms[(i, m)]
            terms.append({"hbar": i, "coeff": "%d/%d" % (c.numerator, c.denominator),
                          "letters": [self.basis.letters[x] for x in m]})
        return json.dumps({"truncation": {"p": self.p_max, "l": self.l_max},
                           "terms": terms})


# -- component evaluation --------------------------------------------------

def evaluate_component(I, i, j, k, inputs):
    """Value of the fully symmetrized component I_{ijkl} on a tuple of
    basis letters (l = len(inputs)).

    The component is pushed to an l-linear functional by summing over all
    orderings of its k word factors and all rotations of each word, with
    mechanical Koszul signs, and evaluated slotwise.
    """
    basis = I.basis
    inputs = tuple(inputs)
    l = len(inputs)
    total = Fraction(0)
    for (i2, j2, ws), c in I.terms.items():
        if (i2, j2) != (i, j) or len(ws) != k:
            continue
        if sum(len(w) for w in ws) != l:
            continue
        total += c * _symmetrized_eval(basis, ws, inputs)
    return total


def _symmetrized_eval(basis, words, inputs):
    """Sum over word orderings and rotations, evaluated on basis letters."""
    k = len(words)
    wpars = [word_parity(basis, w) for w in words]
    total = Fraction(0)
    for perm in permutations(range(k)):
        psign = perm_sign(wpars, perm)
        ordered = [words[p] for p in perm]
        # slot blocks must match word lengths
        blocks = []
        pos = 0
        ok = True
        for w in ordered:
            blocks.append(inputs[pos:pos + len(w)])
            pos += len(w)
        if pos != len(inputs):
            continue
        # sum over rotations of each word
        val = Fraction(psign)
        for w, blk in zip(ordered, blocks):
            wv = _cyclic_eval(basis, w, blk)
            if wv == 0:
                val = Fraction(0)
                break
            val *= wv
        total += val
    if total == 0:
        return total
    # global slotwise evaluation sign over all inputs
    return total * eval_sign([basis.parity(x) for x in inputs])


def _cyclic_eval(basis, word, blk):
    """Sum over rotations of a single dual word against a block of basis
    letters; the slotwise sign is applied globally by the caller."""
    n = len(word)
    if n != len(blk):
        return Fraction(0)
    pars = basis.parities(word)
    total = 0
    for r in range(n):
        rot = word[r:] + word[:r]
        if tuple(rot) == tuple(blk):
            total += rotation_sign(pars, r)
    return Fraction(total)
