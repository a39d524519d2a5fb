"""Kac-Moody matrices, root generating systems and their Weyl groups.

A root generating system is stored through an explicit realization: the
apartment is Q^n, simple roots are rows of ``roots`` (linear forms) and simple
coroots are rows of ``coroots`` (vectors).  All arithmetic is exact.

Weyl words follow the composition convention ``word = (i1, ..., ik)`` means
``r_i1 o ... o r_ik``, so the rightmost letter acts first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from . import _exact as ex
from ._exact import Matrix, Vector, ZERO


class GCMError(ValueError):
    """The integer matrix is not a generalized Cartan matrix."""


class DiagonalNotTwo(GCMError):
    pass


class PositiveOffDiagonal(GCMError):
    pass


class AsymmetricZero(GCMError):
    pass


class RealizationError(ValueError):
    """Root/coroot coordinates do not realize the given matrix."""


class IndexOutOfRange(IndexError):
    pass


class NotAffine(ValueError):
    pass


class NotInTitsCone(ArithmeticError):
    """Dominance reduction did not finish within the iteration bound.

    For finite and affine matrices this means the vector is outside the Tits
    cone; for indefinite matrices it is only a semi-decision.
    """

    def __init__(self, bound: int, last: Vector):
        super().__init__(f"no dominant representative found within {bound} reflections")
        self.bound = bound
        self.last = last


# ---------------------------------------------------------------------------
# Kac-Moody matrices


@dataclass(frozen=True)
class KacMoodyMatrix:
    entries: Tuple[Tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def submatrix(self, idx: Sequence[int]) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(self.entries[i][j] for j in idx) for i in idx)


def validate_gcm(entries) -> KacMoodyMatrix:
    """Check the three generalized Cartan matrix conditions."""
    rows = [list(r) for r in entries]
    m = len(rows)
    if m == 0 or any(len(r) != m for r in rows):
        raise GCMError("matrix must be square and nonempty")
    for r in rows:
        for x in r:
            if isinstance(x, bool) or int(x) != x:
                raise GCMError(f"entry {x!r} is not an integer")
    a = tuple(tuple(int(x) for x in r) for r in rows)
    for i in range(m):
        if a[i][i] != 2:
            raise DiagonalNotTwo(f"a[{i}][{i}] = {a[i][i]}, expected 2")
    for i in range(m):
        for j in range(m):
            if i != j and a[i][j] > 0:
                raise PositiveOffDiagonal(f"a[{i}][{j}] = {a[i][j]} > 0")
    for i in range(m):
        for j in range(m):
            if (a[i][j] == 0) != (a[j][i] == 0):
                raise AsymmetricZero(f"a[{i}][{j}] = {a[i][j]} but a[{j}][{i}] = {a[j][i]}")
    return KacMoodyMatrix(a)


class CartanKind(str, Enum):
    FINITE = "Finite"
    AFFINE = "Affine"
    INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class BlockType:
    indices: Tuple[int, ...]
    kind: CartanKind
    marks: Optional[Tuple[int, ...]] = None


def indecomposable_blocks(a: KacMoodyMatrix) -> List[Tuple[int, ...]]:
    m = a.size
    seen = [False] * m
    blocks = []
    for s in range(m):
        if seen[s]:
            continue
        comp, stack = [], [s]
        seen[s] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(m):
                if not seen[j] and a[i, j] != 0:
                    seen[j] = True
                    stack.append(j)
        blocks.append(tuple(sorted(comp)))
    return blocks


def _minors_positive(sub, proper_only=False) -> bool:
    k = len(sub)
    for size in range(1, k + (0 if proper_only else 1)):
        for idx in combinations(range(k), size):
            if ex.det([[sub[i][j] for j in idx] for i in idx]) <= 0:
                return False
    return True


def _primitive_integer(v: Sequence[Fraction]) -> Tuple[int, ...]:
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    ints = [x // g for x in ints]
    if all(x <= 0 for x in ints):
        ints = [-x for x in ints]
    return tuple(ints)


def affine_marks(sub) -> Tuple[int, ...]:
    """Minimal positive integer vector c with sub . c = 0."""
    ker = ex.nullspace([[Fraction(x) for x in r] for r in sub])
    if len(ker) != 1:
        raise NotAffine("kernel is not one-dimensional")
    c = _primitive_integer(ker[0])
    if any(x <= 0 for x in c):
        raise NotAffine("kernel vector is not positive")
    return c


def classify_type(a: KacMoodyMatrix) -> List[BlockType]:
    """Finite / affine / indefinite label for each indecomposable block.

    Uses the principal-minor criterion: finite iff all principal minors are
    positive; affine iff the determinant vanishes and all proper principal
    minors are positive; indefinite otherwise.
    """
    out = []
    for idx in indecomposable_blocks(a):
        sub = a.submatrix(idx)
        if _minors_positive(sub):
            out.append(BlockType(idx, CartanKind.FINITE))
        elif ex.det(sub) == 0 and _minors_positive(sub, proper_only=True):
            out.append(BlockType(idx, CartanKind.AFFINE, affine_marks(sub)))
        else:
            out.append(BlockType(idx, CartanKind.INDEFINITE))
    return out


def is_finite_type(a: KacMoodyMatrix, idx: Optional[Sequence[int]] = None) -> bool:
    """Whether the principal submatrix on ``idx`` (default: all) is of finite type."""
    if idx is None:
        idx = range(a.size)
    idx = tuple(idx)
    if not idx:
        return True
    return _minors_positive(a.submatrix(idx))


# ---------------------------------------------------------------------------
# Weyl elements


@dataclass(frozen=True)
class WeylElement:
    """Affine Weyl element ``v -> translation + r_i1 o ... o r_ik (v)``.

    ``translation`` of None stands for the zero vector.
    """

    word: Tuple[int, ...] = ()
    translation: Optional[Vector] = None

    @staticmethod
    def make(word=(), translation=None) -> "WeylElement":
        t = None if translation is None else ex.vec(translation)
        if t is not None and all(x == 0 for x in t):
            t = None
        return WeylElement(tuple(int(i) for i in word), t)

    def shift(self, n: int) -> Vector:
        return self.translation if self.translation is not None else ex.zeros(n)


IDENTITY = WeylElement()


# ---------------------------------------------------------------------------
# Root generating systems


@dataclass(frozen=True)
class RootGeneratingSystem:
    gcm: KacMoodyMatrix
    dim: int
    roots: Matrix
    coroots: Matrix
    _cache: Dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        m = self.gcm.size
        if len(self.roots) != m or len(self.coroots) != m:
            raise RealizationError("need one root and one coroot per matrix index")
        if any(len(r) != self.dim for r in self.roots + self.coroots):
            raise RealizationError(f"root and coroot rows must have length {self.dim}")
        for i in range(m):
            for j in range(m):
                if ex.dot(self.roots[j], self.coroots[i]) != self.gcm[i, j]:
                    raise RealizationError(
                        f"alpha_{j}(alpha_{i}^vee) = {ex.dot(self.roots[j], self.coroots[i])}"
                        f" but a[{i}][{j}] = {self.gcm[i, j]}")
        if ex.rank(self.roots) != m:
            raise RealizationError("simple roots are not linearly independent")
        if ex.rank(self.coroots) != m:
            raise RealizationError("simple coroots are not linearly independent")

    @classmethod
    def from_rows(cls, gcm, roots, coroots) -> "RootGeneratingSystem":
        a = gcm if isinstance(gcm, KacMoodyMatrix) else validate_gcm(gcm)
        r = ex.mat(roots)
        return cls(a, len(r[0]), r, ex.mat(coroots))

    @property
    def rank(self) -> int:
        return self.gcm.size

    def _check_index(self, i: int):
        if not 0 <= i < self.rank:
            raise IndexOutOfRange(f"index {i} not in 0..{self.rank - 1}")

    # simple reflections -----------------------------------------------

    def alpha(self, i: int, v: Vector) -> Fraction:
        return ex.dot(self.roots[i], v)

    def alphas(self, v: Vector) -> Vector:
        return tuple(ex.dot(r, v) for r in self.roots)

    def reflect(self, i: int, v: Vector) -> Vector:
        self._check_index(i)
        a = self.alpha(i, v)
        if a == 0:
            return tuple(v)
        return tuple(x - a * c for x, c in zip(v, self.coroots[i]))

    def word_matrix(self, word: Tuple[int, ...]) -> Matrix:
        """Matrix of r_i1 o ... o r_ik."""
        key = ("mat", word)
        m = self._cache.get(key)
        if m is None:
            for i in word:
                self._check_index(i)
            n = self.dim
            m = ex.identity(n)
            for i in word:
                ri = tuple(
                    tuple((1 if a == b else 0) - self.coroots[i][a] * self.roots[i][b] for b in range(n))
                    for a in range(n))
                m = ex.mat_mul(m, ri)
            self._cache[key] = m
        return m

    def apply_word(self, word: Sequence[int], v: Vector) -> Vector:
        for i in reversed(tuple(word)):
            v = self.reflect(i, v)
        return v

    # roots in simple-root coordinates ---------------------------------

    def reflect_coeffs(self, i: int, c: Tuple[int, ...]) -> Tuple[int, ...]:
        """Simple-root coordinates of r_i.beta for beta = sum c_j alpha_j."""
        pairing = sum(self.gcm[i, j] * c[j] for j in range(self.rank))
        if pairing == 0:
            return tuple(c)
        out = list(c)
        out[i] -= pairing
        return tuple(out)

    def act_on_coeffs(self, word: Sequence[int], c: Tuple[int, ...]) -> Tuple[int, ...]:
        for i in reversed(tuple(word)):
            c = self.reflect_coeffs(i, c)
        return c

    def root_form(self, c: Sequence) -> Vector:
        n = self.dim
        out = [ZERO] * n
        for ci, row in zip(c, self.roots):
            if ci:
                for k in range(n):
                    out[k] += ci * row[k]
        return tuple(out)

    def form_coeffs(self, form: Vector) -> Optional[Vector]:
        """Coordinates of a linear form in the simple roots, None if outside their span."""
        key = ("coef", tuple(form))
        if key in self._cache:
            return self._cache[key]
        sol = ex.solve(ex.transpose(self.roots), form)
        if sol is not None and self.root_form(sol) != tuple(form):
            sol = None
        self._cache[key] = sol
        return sol

    def is_real_root(self, c: Sequence) -> bool:
        """Decide whether integer simple-root coordinates c describe a real root."""
        if any(Fraction(x).denominator != 1 for x in c):
            return False
        c = tuple(int(x) for x in c)
        if all(x == 0 for x in c):
            return False
        for _ in range(10_000):
            if all(x <= 0 for x in c):
                c = tuple(-x for x in c)
            if any(x < 0 for x in c):
                return False
            if sum(c) == 1:
                return True
            for i in range(self.rank):
                pairing = sum(self.gcm[i, j] * c[j] for j in range(self.rank))
                if pairing > 0:
                    c = self.reflect_coeffs(i, c)
                    break
            else:
                return False
        return False

    # coroots and special points ---------------------------------------

    def coroot_coords(self, v: Vector) -> Optional[Vector]:
        """u with v = sum u_i alpha_i^vee, or None when v is outside the coroot span."""
        sol = ex.solve(ex.transpose(self.coroots), v)
        if sol is None:
            return None
        back = [ZERO] * self.dim
        for ui, row in zip(sol, self.coroots):
            for k in range(self.dim):
                back[k] += ui * row[k]
        return sol if tuple(back) == tuple(v) else None

    def chamber_point(self) -> Vector:
        """A point rho of the fundamental chamber with alpha_i(rho) = 1 for all i."""
        key = ("rho",)
        if key not in self._cache:
            self._cache[key] = ex.solve(self.roots, (Fraction(1),) * self.rank)
        return self._cache[key]

    def in_inessential(self, v: Vector) -> bool:
        return all(ex.dot(r, v) == 0 for r in self.roots)

    def is_dominant(self, v: Vector) -> bool:
        return all(ex.dot(r, v) >= 0 for r in self.roots)

    # affine Weyl group -------------------------------------------------

    def apply(self, w: WeylElement, v: Vector) -> Vector:
        v = ex.vec(v)
        out = self.apply_word(w.word, v)
        if w.translation is not None:
            out = ex.add(out, w.translation)
        return out

    def compose(self, a: WeylElement, b: WeylElement) -> WeylElement:
        """a o b."""
        t = self.apply(WeylElement(a.word, a.translation), b.shift(self.dim))
        return self.normalize(WeylElement(a.word + b.word, t))

    def inverse(self, w: WeylElement) -> WeylElement:
        inv_word = tuple(reversed(w.word))
        t = ex.neg(self.apply_word(inv_word, w.shift(self.dim)))
        return self.normalize(WeylElement(inv_word, t))

    def reduced_word(self, word: Sequence[int]) -> Tuple[int, ...]:
        """A reduced expression for the vectorial element, found by descent on rho."""
        word = tuple(word)
        key = ("red", word)
        if key in self._cache:
            return self._cache[key]
        rho = self.chamber_point()
        v = self.apply_word(word, rho)
        letters = []
        for _ in range(100_000):
            i = next((i for i in range(self.rank) if self.alpha(i, v) < 0), None)
            if i is None:
                break
            v = self.reflect(i, v)
            letters.append(i)
        red = tuple(letters)
        self._cache[key] = red
        return red

    def normalize(self, w: WeylElement) -> WeylElement:
        return WeylElement.make(self.reduced_word(w.word), w.translation)

    def linear_part(self, w: WeylElement) -> Matrix:
        return self.word_matrix(w.word)

    def weyl_equal(self, a: WeylElement, b: WeylElement) -> bool:
        return (self.word_matrix(a.word) == self.word_matrix(b.word)
                and a.shift(self.dim) == b.shift(self.dim))

    def length(self, w: WeylElement) -> int:
        return len(self.reduced_word(w.word))

    def in_coroot_lattice(self, v: Vector, generators: Optional[Sequence[Fraction]] = None) -> bool:
        """v in sum_i Z g_i alpha_i^vee (g_i = 1 unless generators are given)."""
        u = self.coroot_coords(v)
        if u is None:
            return False
        gens = generators or (Fraction(1),) * self.rank
        return all((ui / g).denominator == 1 for ui, g in zip(u, gens))


def apply_weyl(system: RootGeneratingSystem, w: WeylElement, v) -> Vector:
    return system.apply(w, v)


def minimal_realization(gcm) -> RootGeneratingSystem:
    """Realization of dimension 2m - rank(A).

    Coroots are the first m standard basis vectors; root j has coordinates
    (a_0j, ..., a_(m-1)j) followed by unit entries chosen greedily (lowest
    root index first) to make the roots independent.
    """
    a = gcm if isinstance(gcm, KacMoodyMatrix) else validate_gcm(gcm)
    m = a.size
    r = ex.rank([[Fraction(x) for x in row] for row in a.entries])
    n = 2 * m - r
    base = [[Fraction(a[i, j]) for i in range(m)] for j in range(m)]
    extra_cols: List[int] = []
    for j in range(m):
        if len(extra_cols) == m - r:
            break
        trial = extra_cols + [j]
        rows = [base[k] + [Fraction(1 if k == c else 0) for c in trial] for k in range(m)]
        if ex.rank(rows) > ex.rank([base[k] + [Fraction(1 if k == c else 0) for c in extra_cols]
                                    for k in range(m)]):
            extra_cols = trial
    roots = tuple(tuple(base[k] + [Fraction(1 if k == c else 0) for c in extra_cols]) for k in range(m))
    coroots = tuple(tuple(Fraction(1 if k == i else 0) for k in range(n)) for i in range(m))
    return RootGeneratingSystem(a, n, roots, coroots)


# ---------------------------------------------------------------------------
# Real roots


@dataclass(frozen=True)
class RootWindow:
    """Real roots w.alpha_i (and negatives) with l(w) <= max_len, in simple-root coordinates."""

    coeffs: Tuple[Tuple[int, ...], ...]
    max_len: int
    saturated: bool

    def forms(self, system: RootGeneratingSystem) -> Tuple[Vector, ...]:
        return tuple(system.root_form(c) for c in self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __contains__(self, c):
        return tuple(c) in set(self.coeffs)


def enumerate_real_roots(system: RootGeneratingSystem, max_len: int) -> RootWindow:
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    m = system.rank
    level = {tuple(1 if k == i else 0 for k in range(m)) for i in range(m)}
    for _ in range(max_len):
        level = level | {system.reflect_coeffs(i, c) for c in level for i in range(m)}
    nxt = level | {system.reflect_coeffs(i, c) for c in level for i in range(m)}
    saturated = nxt == level
    sym = level | {tuple(-x for x in c) for c in level}
    return RootWindow(tuple(sorted(sym, key=lambda c: (sum(map(abs, c)), tuple(-x for x in c)))),
                      max_len, saturated)


# ---------------------------------------------------------------------------
# Dominance


def default_dominance_bound(v: Vector) -> int:
    return int(10 * (1 + sum(abs(x) for x in v)))


def dominant_representative(system: RootGeneratingSystem, v, bound: Optional[int] = None):
    """(lambda, w) with lambda = w.v dominant; raises NotInTitsCone past the bound."""
    v = ex.vec(v)
    if bound is None:
        bound = default_dominance_bound(v)
    applied: List[int] = []
    cur = v
    for _ in range(bound + 1):
        i = next((i for i in range(system.rank) if system.alpha(i, cur) < 0), None)
        if i is None:
            return cur, WeylElement(tuple(reversed(applied)))
        cur = system.reflect(i, cur)
        applied.append(i)
    raise NotInTitsCone(bound, cur)


# ---------------------------------------------------------------------------
# Null root


@dataclass(frozen=True)
class NullRoot:
    marks: Tuple[int, ...]
    as_form: Vector

    def __call__(self, v) -> Fraction:
        return ex.dot(self.as_form, ex.vec(v))


def null_root(system: RootGeneratingSystem) -> NullRoot:
    blocks = classify_type(system.gcm)
    if len(blocks) != 1 or blocks[0].kind is not CartanKind.AFFINE:
        raise NotAffine("the null root needs an indecomposable affine matrix")
    marks = blocks[0].marks
    return NullRoot(marks, system.root_form(marks))


def is_indecomposable_affine(system: RootGeneratingSystem) -> bool:
    blocks = classify_type(system.gcm)
    return len(blocks) == 1 and blocks[0].kind is CartanKind.AFFINE
