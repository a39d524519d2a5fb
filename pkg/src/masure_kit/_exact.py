"""Exact rational linear algebra and linear programming.

Everything here works on ``fractions.Fraction`` (ints are accepted and
promoted).  Vectors are tuples, matrices are tuples of row tuples.  The LP
solver is a dense two-phase simplex with Bland's rule, which is plenty for
the dimensions this package deals with (n <= 4, a few dozen constraints).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence, Tuple

Q = Fraction
Vector = Tuple[Fraction, ...]
Matrix = Tuple[Vector, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions, decimal strings and ``"p/q"`` strings exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        # floats are converted through their shortest repr, not their binary value
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational")


def vec(xs: Iterable) -> Vector:
    return tuple(as_fraction(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Matrix:
    return tuple(vec(r) for r in rows)


def dot(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    if len(x) != len(y):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(y)}")
    return sum((a * b for a, b in zip(x, y)), ZERO)


def add(x: Vector, y: Vector) -> Vector:
    return tuple(a + b for a, b in zip(x, y))


def sub(x: Vector, y: Vector) -> Vector:
    return tuple(a - b for a, b in zip(x, y))


def scale(c: Fraction, x: Vector) -> Vector:
    return tuple(c * a for a in x)


def neg(x: Vector) -> Vector:
    return tuple(-a for a in x)


def zeros(n: int) -> Vector:
    return (ZERO,) * n


def identity(n: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def mat_vec(m: Matrix, v: Vector) -> Vector:
    return tuple(dot(row, v) for row in m)


def vec_mat(v: Vector, m: Matrix) -> Vector:
    """Row vector times matrix (used to pull linear forms back along maps)."""
    n = len(m[0]) if m else 0
    return tuple(sum((v[i] * m[i][j] for i in range(len(m))), ZERO) for j in range(n))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(dot(row, col) for col in cols) for row in a)


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def rref(rows: Sequence[Sequence[Fraction]]):
    """Reduced row echelon form.  Returns (matrix as list of lists, pivot columns)."""
    a = [list(r) for r in rows]
    if not a:
        return a, []
    ncols = len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(rows)[1])


def det(m: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(m)
    if n == 0:
        return ONE
    a = [[as_fraction(x) for x in r] for r in m]
    d = ONE
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return ZERO
        if p != c:
            a[c], a[p] = a[p], a[c]
            d = -d
        d *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return d


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Optional[Vector]:
    """One exact solution of ``a x = b`` (free variables set to 0), or None."""
    if not a:
        return ()
    ncols = len(a[0])
    aug = [list(r) + [bi] for r, bi in zip(a, b)]
    red, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [ZERO] * ncols
    for row, c in zip(red, pivots):
        x[c] = row[-1]
    return tuple(x)


def nullspace(a: Sequence[Sequence[Fraction]], ncols: Optional[int] = None) -> Tuple[Vector, ...]:
    """Basis of {x : a x = 0}."""
    if not a:
        n = ncols or 0
        return identity(n)
    n = len(a[0])
    red, pivots = rref(a)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [ZERO] * n
        x[f] = ONE
        for row, c in zip(red, pivots):
            x[c] = -row[f]
        basis.append(tuple(x))
    return tuple(basis)


def inverse(m: Matrix) -> Matrix:
    n = len(m)
    aug = [list(r) + list(e) for r, e in zip(m, identity(n))]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return tuple(tuple(row[n:]) for row in red[:n])


# ---------------------------------------------------------------------------
# Linear programming


class LPResult:
    __slots__ = ("status", "value", "x")

    def __init__(self, status: str, value: Optional[Fraction] = None, x: Optional[Vector] = None):
        self.status = status
        self.value = value
        self.x = x

    def __repr__(self):
        return f"LPResult({self.status!r}, value={self.value}, x={self.x})"


def _simplex_nonneg(c, a_ub, b_ub):
    """maximize c.y s.t. a_ub y <= b_ub, y >= 0 (all exact).

    Two-phase tableau simplex with Bland's rule.
    Returns ("optimal", value, y) | ("unbounded", None, None) | ("infeasible", None, None).
    """
    m = len(a_ub)
    n = len(c)
    # columns: y (n) | slacks (m) | artificials (k) | rhs
    art_rows = [i for i in range(m) if b_ub[i] < 0]
    k = len(art_rows)
    width = n + m + k
    tab = []
    basis = []
    art_index = {}
    for i in range(m):
        sign = -1 if b_ub[i] < 0 else 1
        row = [sign * x for x in a_ub[i]] + [ZERO] * (m + k) + [sign * b_ub[i]]
        row[n + i] = Fraction(sign)
        if sign < 0:
            j = n + m + len(art_index)
            art_index[i] = j
            row[j] = ONE
            basis.append(j)
        else:
            basis.append(n + i)
        tab.append(row)

    def pivot(r, col):
        pv = tab[r][col]
        if pv != 1:
            tab[r] = [x / pv for x in tab[r]]
        prow = tab[r]
        for i in range(len(tab)):
            if i != r:
                f = tab[i][col]
                if f != 0:
                    tab[i] = [x - f * y for x, y in zip(tab[i], prow)]
        basis[r] = col

    def run(obj, allowed):
        # obj: list of length width, maximize obj . z
        while True:
            # reduced costs: obj_j - sum_i obj_{basis_i} tab[i][j]
            entering = None
            for j in allowed:
                if j in basis:
                    continue
                rc = obj[j] - sum((obj[basis[i]] * tab[i][j] for i in range(len(tab))), ZERO)
                if rc > 0:
                    entering = j
                    break
            if entering is None:
                return "optimal"
            leave = None
            best = None
            for i in range(len(tab)):
                a = tab[i][entering]
                if a > 0:
                    ratio = tab[i][-1] / a
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                        best = ratio
                        leave = i
            if leave is None:
                return "unbounded"
            pivot(leave, entering)

    if k:
        obj1 = [ZERO] * width
        for j in art_index.values():
            obj1[j] = Fraction(-1)
        run(obj1, range(width))
        art_val = sum((tab[i][-1] for i in range(m) if basis[i] >= n + m), ZERO)
        if art_val != 0:
            return "infeasible", None, None
        # drive degenerate artificials out of the basis
        for i in range(m):
            if basis[i] >= n + m:
                col = next((j for j in range(n + m) if tab[i][j] != 0), None)
                if col is not None:
                    pivot(i, col)
    obj2 = list(c) + [ZERO] * (m + k)
    status = run(obj2, range(n + m))
    if status == "unbounded":
        return "unbounded", None, None
    y = [ZERO] * n
    for i, bcol in enumerate(basis):
        if bcol < n:
            y[bcol] = tab[i][-1]
    value = sum((ci * yi for ci, yi in zip(c, y)), ZERO)
    return "optimal", value, tuple(y)


def maximize(c: Sequence[Fraction], a_ub: Sequence[Sequence[Fraction]], b_ub: Sequence[Fraction],
             a_eq: Sequence[Sequence[Fraction]] = (), b_eq: Sequence[Fraction] = ()) -> LPResult:
    """maximize c.x over free x subject to a_ub x <= b_ub and a_eq x = b_eq."""
    n = len(c)
    rows = [list(r) for r in a_ub] + [list(r) for r in a_eq] + [[-v for v in r] for r in a_eq]
    rhs = list(b_ub) + list(b_eq) + [-v for v in b_eq]
    # free x = x+ - x-
    split_rows = [r + [-v for v in r] for r in rows]
    split_c = list(c) + [-v for v in c]
    status, value, y = _simplex_nonneg(split_c, split_rows, rhs)
    if status != "optimal":
        return LPResult(status)
    x = tuple(y[i] - y[n + i] for i in range(n))
    return LPResult("optimal", value, x)


def minimize(c, a_ub, b_ub, a_eq=(), b_eq=()) -> LPResult:
    res = maximize([-v for v in c], a_ub, b_ub, a_eq, b_eq)
    if res.status == "optimal":
        return LPResult("optimal", -res.value, res.x)
    return res


def feasible_point(n: int, ge: Sequence[Tuple[Vector, Fraction]] = (),
                   gt: Sequence[Tuple[Vector, Fraction]] = (),
                   eq: Sequence[Tuple[Vector, Fraction]] = ()) -> Optional[Vector]:
    """A point x with f.x + k >= 0 for (f, k) in ge, > 0 for gt, = 0 for eq; or None.

    Strict inequalities are handled by maximising a common slack s <= 1.
    """
    a_ub, b_ub = [], []
    for f, k in ge:
        a_ub.append([-v for v in f] + [ZERO])
        b_ub.append(k)
    for f, k in gt:
        a_ub.append([-v for v in f] + [ONE])
        b_ub.append(k)
    a_eq = [list(f) + [ZERO] for f, _ in eq]
    b_eq = [-k for _, k in eq]
    if gt:
        a_ub.append([ZERO] * n + [ONE])
        b_ub.append(ONE)
        c = [ZERO] * n + [ONE]
    else:
        c = [ZERO] * (n + 1)
        a_ub.append([ZERO] * n + [ONE])
        b_ub.append(ZERO)
        a_ub.append([ZERO] * n + [-ONE])
        b_ub.append(ZERO)
    res = maximize(c, a_ub, b_ub, a_eq, b_eq)
    if res.status != "optimal":
        # "unbounded" cannot happen because s is capped
        return None
    if gt and res.value <= 0:
        return None
    return res.x[:n]


# ---------------------------------------------------------------------------
# Vertex/ray description for small dimensions


class VRep:
    """{x : f_i.x + k_i >= 0} through its quotient by the common kernel of the f_i.

    ``basis`` holds r independent forms; y = basis.x maps onto R^r where the
    set is a pointed polyhedron with the listed vertices and extreme rays.
    """

    __slots__ = ("n", "basis", "vertices", "rays")

    def __init__(self, n, basis, vertices, rays):
        self.n = n
        self.basis = basis
        self.vertices = vertices
        self.rays = rays

    @property
    def feasible(self) -> bool:
        return bool(self.vertices)

    def lift(self, y: Vector) -> Vector:
        if not self.basis:
            return zeros(self.n)
        return solve(self.basis, y)

    def minimize(self, f: Sequence[Fraction]):
        """("optimal", value, x) | ("unbounded", None, None) | ("infeasible", None, None)."""
        if not self.vertices:
            return "infeasible", None, None
        if not self.basis:
            if any(v != 0 for v in f):
                return "unbounded", None, None
            return "optimal", ZERO, zeros(self.n)
        g = solve(transpose(self.basis), f)
        if g is None:
            return "unbounded", None, None
        if any(dot(g, d) < 0 for d in self.rays):
            return "unbounded", None, None
        best = min(self.vertices, key=lambda v: dot(g, v))
        return "optimal", dot(g, best), self.lift(best)


def _vrep_budget(m: int, r: int) -> int:
    from math import comb
    return comb(m, r) + comb(m, max(r - 1, 0))


def vrep(n: int, constraints: Tuple[Tuple[Vector, Fraction], ...], budget: int = 4000) -> Optional[VRep]:
    """Exact V-description, or None when it would take more than ``budget`` subset solves."""
    key = (n, constraints)
    hit = _VREP_CACHE.get(key)
    if hit is not None or key in _VREP_CACHE:
        return hit
    rows = [f for f, _ in constraints if any(x != 0 for x in f)]
    if any(all(x == 0 for x in f) and k < 0 for f, k in constraints):
        out = VRep(n, (), (), ())
        _VREP_CACHE[key] = out
        return out
    red, pivots = rref(rows) if rows else ([], [])
    r = len(pivots)
    if _vrep_budget(len(rows), r) > budget:
        _VREP_CACHE[key] = None
        return None
    # basis: r independent rows among the constraint forms
    basis = []
    for f in rows:
        if rank(basis + [f]) > len(basis):
            basis.append(tuple(f))
        if len(basis) == r:
            break
    bt = transpose(basis) if basis else ()
    cons = []
    for f, k in constraints:
        if any(x != 0 for x in f):
            cons.append((solve(bt, f), k))
    if r == 0:
        out = VRep(n, (), ((),), ())
        _VREP_CACHE[key] = out
        return out

    def ok(y):
        return all(dot(c, y) + k >= 0 for c, k in cons)

    verts = {}
    for sub in combinations(cons, r):
        a = [c for c, _ in sub]
        if det(a) == 0:
            continue
        y = solve(a, [-k for _, k in sub])
        if y not in verts and ok(y):
            verts[y] = None
    rays = {}
    if verts:
        for sub in combinations(cons, r - 1):
            a = [c for c, _ in sub]
            if a and rank(a) != r - 1:
                continue
            ns = nullspace(a, r) if a else tuple(tuple(ONE if i == j else ZERO for i in range(r)) for j in range(r))
            if len(ns) != 1:
                continue
            d = ns[0]
            vals = [dot(c, d) for c, _ in cons]
            if all(v >= 0 for v in vals):
                rays[d] = None
            if all(v <= 0 for v in vals):
                rays[neg(d)] = None
    out = VRep(n, tuple(basis), tuple(verts), tuple(rays))
    if len(_VREP_CACHE) > 50_000:
        _VREP_CACHE.clear()
    _VREP_CACHE[key] = out
    return out


_VREP_CACHE: dict = {}
