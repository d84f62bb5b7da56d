"""
Integer lattice tools: Hermite bases, kernels of congruence systems and the
Smith normal form, plus the finite abelian quotient Z/B they present.

Vectors are row vectors (plain lists of Python ints). A lattice is given by an
echelon basis: row i has its first non-zero entry (positive) at pivots[i],
and entries above each pivot are reduced modulo it.
"""

from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import StableLabError

Vector = List[int]


def ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def hermite_rows(rows: Sequence[Sequence[int]], dim: int) -> Tuple[List[Vector], List[int]]:
    """Echelon (Hermite) basis of the lattice spanned by rows, with pivot columns."""
    work = [list(r) for r in rows if any(r)]
    basis: List[Vector] = []
    pivots: List[int] = []
    for col in range(dim):
        active = [r for r in work if r[col] != 0]
        if not active:
            continue
        rest = [r for r in work if r[col] == 0]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            pivot = active[0]
            survivors = [pivot]
            for r in active[1:]:
                q = r[col] // pivot[col]
                reduced = [a - q * b for a, b in zip(r, pivot)]
                if reduced[col] != 0:
                    survivors.append(reduced)
                elif any(reduced):
                    rest.append(reduced)
            active = survivors
        pivot = active[0]
        if pivot[col] < 0:
            pivot = [-a for a in pivot]
        for i, b in enumerate(basis):
            q = b[col] // pivot[col]
            if q:
                basis[i] = [x - q * y for x, y in zip(b, pivot)]
        basis.append(pivot)
        pivots.append(col)
        work = rest
    return basis, pivots


def solve_in_basis(basis: Sequence[Vector], pivots: Sequence[int], v: Sequence[int]) -> Optional[Vector]:
    """Integer coordinates of v in an echelon basis, or None when v is not in the lattice."""
    v = list(v)
    coeffs = []
    for row, col in zip(basis, pivots):
        if v[col] % row[col]:
            return None
        c = v[col] // row[col]
        if c:
            v = [a - c * b for a, b in zip(v, row)]
        coeffs.append(c)
    if any(v):
        return None
    return coeffs


def kernel_mod(
    constraints: Sequence[Tuple[Sequence[int], int]],
    moduli: Sequence[int],
) -> Tuple[List[Vector], List[int]]:
    """
    Lattice {x in Z^n : r.x = 0 mod d for every (r, d)}.

    `moduli` describes L0 = diag(moduli), which must lie in the kernel of every
    constraint; basis vectors are kept reduced modulo L0 while constraints are
    absorbed, so entries stay small. Returns an echelon basis.
    """
    n = len(moduli)
    if n == 0:
        return [], []
    mods = np.asarray(moduli, dtype=np.int64)
    B = np.eye(n, dtype=np.int64)

    for row, d in constraints:
        if d == 1:
            continue
        r = np.asarray(row, dtype=np.int64) % d
        if not r.any():
            continue
        vals = (B @ r) % d
        nonzero = np.flatnonzero(vals)
        if nonzero.size == 0:
            continue

        # Unimodular row operations until one vector carries the gcd
        i0 = int(nonzero[0])
        g0 = int(vals[i0])
        for i in nonzero[1:]:
            i = int(i)
            a, b = g0, int(vals[i])
            g, x, y = ext_gcd(a, b)
            u, w = B[i0].copy(), B[i].copy()
            B[i0] = (x * u + y * w) % mods
            B[i] = ((b // g) * u - (a // g) * w) % mods
            g0 = g
        B[i0] = (B[i0] * (d // gcd(g0, d))) % mods

    rows = [list(map(int, b)) for b in B]
    rows += [[int(mods[i]) if j == i else 0 for j in range(n)] for i in range(n)]
    return hermite_rows(rows, n)


def _identity(n: int) -> List[Vector]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


class _ColumnTracker:
    """A matrix under row/column operations, recording column transforms Q and Q^-1."""

    def __init__(self, matrix: Sequence[Sequence[int]], ncols: int):
        self.A = [list(r) for r in matrix]
        self.m = len(self.A)
        self.n = ncols
        self.Q = _identity(ncols)
        self.Qinv = _identity(ncols)

    def col_swap(self, j: int, k: int) -> None:
        if j == k:
            return
        for row in self.A:
            row[j], row[k] = row[k], row[j]
        for row in self.Q:
            row[j], row[k] = row[k], row[j]
        self.Qinv[j], self.Qinv[k] = self.Qinv[k], self.Qinv[j]

    def col_subtract(self, j: int, t: int, q: int) -> None:
        """column j -= q * column t"""
        for row in self.A:
            row[j] -= q * row[t]
        for row in self.Q:
            row[j] -= q * row[t]
        self.Qinv[t] = [a + q * b for a, b in zip(self.Qinv[t], self.Qinv[j])]

    def row_swap(self, i: int, k: int) -> None:
        self.A[i], self.A[k] = self.A[k], self.A[i]

    def row_subtract(self, i: int, s: int, q: int) -> None:
        self.A[i] = [a - q * b for a, b in zip(self.A[i], self.A[s])]


# Moves least non-zero element of the south-eastern block starting at [s, s] into position
def _move_least_to_start(M: _ColumnTracker, s: int) -> bool:
    pos, num = None, 0
    for i in range(s, M.m):
        for j in range(s, M.n):
            value = M.A[i][j]
            if value != 0 and (pos is None or abs(value) < num):
                pos, num = (i, j), abs(value)
    if pos is None:
        return False
    M.row_swap(s, pos[0])
    M.col_swap(s, pos[1])
    return True


# Makes row s and column s zero outside the pivot
def _null_edging(M: _ColumnTracker, s: int) -> None:
    while True:
        pivot = M.A[s][s]
        for i in range(s + 1, M.m):
            if M.A[i][s] != 0:
                M.row_subtract(i, s, M.A[i][s] // pivot)
        for j in range(s + 1, M.n):
            if M.A[s][j] != 0:
                M.col_subtract(j, s, M.A[s][j] // pivot)

        # Remainders smaller than the pivot move into position and we go again
        pos, num = None, abs(pivot)
        for i in range(s + 1, M.m):
            if M.A[i][s] != 0 and abs(M.A[i][s]) < num:
                pos, num = (i, s), abs(M.A[i][s])
        for j in range(s + 1, M.n):
            if M.A[s][j] != 0 and abs(M.A[s][j]) < num:
                pos, num = (s, j), abs(M.A[s][j])
        if pos is None:
            return
        if pos[1] == s:
            M.row_swap(s, pos[0])
        else:
            M.col_swap(s, pos[1])


def smith_normal_form(matrix: Sequence[Sequence[int]], ncols: int) -> Tuple[List[int], List[Vector], List[Vector]]:
    """
    Diagonal d_1 | d_2 | ... of the Smith form P A Q, together with Q and Q^-1.

    Only column transforms are tracked: rows of A span the same lattice as
    rows of D Q^-1.
    """
    M = _ColumnTracker(matrix, ncols)
    diag = []
    for s in range(min(M.m, M.n)):
        if not _move_least_to_start(M, s):
            break
        while True:
            _null_edging(M, s)
            pivot = M.A[s][s]
            bad = next(
                (i for i in range(s + 1, M.m) for j in range(s + 1, M.n) if M.A[i][j] % pivot),
                None,
            )
            if bad is None:
                break
            M.A[s] = [a + b for a, b in zip(M.A[s], M.A[bad])]
        diag.append(abs(M.A[s][s]))
    diag += [0] * (ncols - len(diag))
    return diag, M.Q, M.Qinv


class LatticeQuotient:
    """
    The finite abelian group Z/B for lattices B <= Z <= Z^dim.

    Z is given by an echelon basis, B by spanning vectors in ambient
    coordinates. Generators are ambient vectors; `coordinates` maps an
    ambient vector of Z to its class in the product of Z/d_i.
    """

    def __init__(self, basis: List[Vector], pivots: List[int], relations: Sequence[Sequence[int]]):
        self.basis = basis
        self.pivots = pivots
        n = len(basis)
        coords = []
        for r in relations:
            c = solve_in_basis(basis, pivots, r)
            if c is None:
                raise StableLabError("relation vector does not lie in the lattice")
            coords.append(c)
        diag, Q, Qinv = smith_normal_form(coords, n) if n else ([], [], [])
        if any(d == 0 for d in diag):
            raise StableLabError("quotient is infinite; relations do not have full rank")
        self.diag = diag
        self.Q = Q
        self.keep = [i for i, d in enumerate(diag) if d != 1]
        self.factors = [diag[i] for i in self.keep]
        self.generators = [self._combine(Qinv[i]) for i in self.keep]

    def _combine(self, coeffs: Sequence[int]) -> Vector:
        dim = len(self.basis[0]) if self.basis else 0
        out = [0] * dim
        for c, row in zip(coeffs, self.basis):
            if c:
                out = [a + c * b for a, b in zip(out, row)]
        return out

    @property
    def order(self) -> int:
        result = 1
        for d in self.factors:
            result *= d
        return result

    def contains(self, v: Sequence[int]) -> bool:
        return solve_in_basis(self.basis, self.pivots, v) is not None

    def coordinates(self, v: Sequence[int]) -> Optional[List[int]]:
        y = solve_in_basis(self.basis, self.pivots, v)
        if y is None:
            return None
        n = len(y)
        result = []
        for i in self.keep:
            z = sum(y[k] * self.Q[k][i] for k in range(n))
            result.append(z % self.diag[i])
        return result

    def vector(self, coords: Sequence[int]) -> Vector:
        """Ambient representative of the class with the given coordinates."""
        dim = len(self.basis[0]) if self.basis else 0
        out = [0] * dim
        for c, g in zip(coords, self.generators):
            if c:
                out = [a + c * b for a, b in zip(out, g)]
        return out

    def to_dict(self) -> Dict[str, list]:
        return {"basis": self.basis, "pivots": self.pivots, "diag": self.diag, "Q": self.Q,
                "generators": self.generators}

    @classmethod
    def from_dict(cls, data: Dict[str, list]) -> "LatticeQuotient":
        obj = cls.__new__(cls)
        obj.basis = data["basis"]
        obj.pivots = data["pivots"]
        obj.diag = data["diag"]
        obj.Q = data["Q"]
        obj.keep = [i for i, d in enumerate(obj.diag) if d != 1]
        obj.factors = [obj.diag[i] for i in obj.keep]
        obj.generators = data["generators"]
        return obj


def invariant_factors_of(orders: Sequence[int]) -> List[int]:
    """Invariant factors of the product of the given cyclic groups."""
    n = len(orders)
    if n == 0:
        return []
    diag, _, _ = smith_normal_form([[orders[i] if j == i else 0 for j in range(n)] for i in range(n)], n)
    return [d for d in diag if d != 1]
