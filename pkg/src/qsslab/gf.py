"""Exact arithmetic over GF(p) and GF(2^r), polynomials and Reed-Solomon codes.

Field elements are plain ``int`` values in ``[0, q)``.  For binary extension
fields bit ``i`` of an element is the coefficient of ``alpha^i``.  Matrices are
row-major lists of lists of elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

# Canonical irreducible polynomials for GF(2^r), x^r term included.
# All are primitive; these are the usual table entries (e.g. 0x11D for r=8).
BINARY_POLYNOMIALS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}

MAX_PRIME = 1 << 16


class FieldError(ValueError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def next_prime(m: int) -> int:
    """Smallest prime ``>= m``."""
    p = max(2, m)
    while not is_prime(p):
        p += 1
    return p


def _clmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _pmod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def _binary_irreducible(poly: int) -> bool:
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for cand in range(1 << d, 1 << (d + 1)):
            if _pmod(poly, cand) == 0:
                return False
    return True


@dataclass(frozen=True)
class Field:
    """A finite field GF(p) (``r == 1``) or GF(2^r).

    Use :func:`gf` or :func:`gf2` rather than constructing directly.
    """

    p: int
    r: int = 1
    poly: int = 0

    def __post_init__(self):
        if self.r == 1 and self.poly == 0:
            if not is_prime(self.p) or self.p > MAX_PRIME:
                raise FieldError(f"GF({self.p}) unsupported: need prime p <= 2^16")
        else:
            if self.p != 2 or not 1 <= self.r <= 16:
                raise FieldError("binary extension fields need p = 2 and 1 <= r <= 16")
            if self.poly.bit_length() - 1 != self.r or not _binary_irreducible(self.poly):
                raise FieldError(f"polynomial {self.poly:#x} is not irreducible of degree {self.r}")

    @property
    def kind(self) -> str:
        return "prime" if self.poly == 0 else "binary-extension"

    @property
    def q(self) -> int:
        return self.p ** self.r

    @property
    def binary(self) -> bool:
        return self.poly != 0

    def __repr__(self):
        return f"GF({self.p})" if not self.binary else f"GF(2^{self.r})"

    def check(self, a: int) -> int:
        if not (isinstance(a, int) and 0 <= a < self.q):
            raise FieldError(f"{a!r} is not an element of {self!r}")
        return a

    def add(self, a: int, b: int) -> int:
        return a ^ b if self.binary else (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return a ^ b if self.binary else (a - b) % self.p

    def neg(self, a: int) -> int:
        return a if self.binary else (-a) % self.p

    def mul(self, a: int, b: int) -> int:
        if self.binary:
            return _pmod(_clmul(a, b), self.poly)
        return (a * b) % self.p

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        if not self.binary:
            return pow(a, e, self.p)
        out = 1
        while e:
            if e & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            e >>= 1
        return out

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError(f"inverse of zero in {self!r}")
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def elements(self) -> range:
        return range(self.q)

    def dot(self, u: Sequence[int], v: Sequence[int]) -> int:
        acc = 0
        for a, b in zip(u, v):
            acc = self.add(acc, self.mul(a, b))
        return acc


def gf(p: int) -> Field:
    return Field(p)


def gf2(r: int, poly: int | None = None) -> Field:
    return Field(2, r, BINARY_POLYNOMIALS[r] if poly is None else poly)


def field_arith(field: Field, op: str, a: int, b: int | None = None) -> int:
    """Dispatch ``add | sub | mul | div | inv | neg`` with range checks."""
    field.check(a)
    if op in ("inv", "neg"):
        return getattr(field, op)(a)
    if b is None:
        raise FieldError(f"{op} needs two operands")
    field.check(b)
    return getattr(field, op)(a, b)


# --------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Poly:
    field: Field
    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: int) -> int:
        F = self.field
        acc = 0
        for c in reversed(self.coeffs):
            acc = F.add(F.mul(acc, x), c)
        return acc

    def coefficient(self, i: int) -> int:
        return self.coeffs[i] if i < len(self.coeffs) else 0


def _poly_mul_linear(F: Field, coeffs: list[int], root: int) -> list[int]:
    # coeffs * (x - root)
    out = [0] * (len(coeffs) + 1)
    for i, c in enumerate(coeffs):
        out[i + 1] = F.add(out[i + 1], c)
        out[i] = F.sub(out[i], F.mul(c, root))
    return out


def poly_interpolate(F: Field, points: Sequence[tuple[int, int]]) -> Poly:
    """Lagrange interpolation through ``points``; degree < len(points)."""
    if not points:
        raise FieldError("need at least one point")
    xs = [F.check(x) for x, _ in points]
    if len(set(xs)) != len(xs):
        raise FieldError("duplicate x-values")
    total = [0] * len(points)
    for j, (xj, yj) in enumerate(points):
        basis = [1]
        denom = 1
        for m, xm in enumerate(xs):
            if m != j:
                basis = _poly_mul_linear(F, basis, xm)
                denom = F.mul(denom, F.sub(xj, xm))
        scale = F.div(F.check(yj), denom)
        for i, c in enumerate(basis):
            total[i] = F.add(total[i], F.mul(c, scale))
    return Poly(F, tuple(total))


# --------------------------------------------------------------------------
# linear algebra


def row_reduce(F: Field, rows: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form with first-nonzero pivoting.

    Returns the nonzero rows of the RREF and their pivot columns.
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = F.inv(m[rank][col])
        m[rank] = [F.mul(inv, v) for v in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                c = m[i][col]
                m[i] = [F.sub(a, F.mul(c, b)) for a, b in zip(m[i], m[rank])]
        pivots.append(col)
        rank += 1
        if rank == len(m):
            break
    return m[:rank], pivots


def rank(F: Field, rows: Sequence[Sequence[int]]) -> int:
    return len(row_reduce(F, rows)[0])


def null_space(F: Field, rows: Sequence[Sequence[int]], ncols: int | None = None) -> list[list[int]]:
    """Basis of ``{v : rows @ v = 0}``."""
    if ncols is None:
        ncols = len(rows[0])
    red, pivots = row_reduce(F, rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [0] * ncols
        v[fc] = 1
        for r, pc in zip(red, pivots):
            v[pc] = F.neg(r[fc])
        basis.append(v)
    return basis


def in_span(F: Field, rows: Sequence[Sequence[int]], target: Sequence[int]) -> bool:
    if not rows:
        return all(t == 0 for t in target)
    return rank(F, list(rows) + [list(target)]) == rank(F, rows)


def solve_left(F: Field, rows: Sequence[Sequence[int]], target: Sequence[int]) -> list[int] | None:
    """Coefficients ``c`` with ``sum_i c_i rows[i] == target``, or None."""
    k = len(rows)
    if k == 0:
        return [] if all(t == 0 for t in target) else None
    n = len(target)
    # augmented system: columns are rows[i], unknowns c_i
    aug = [[rows[i][j] for i in range(k)] + [target[j]] for j in range(n)]
    red, pivots = row_reduce(F, aug)
    if k in pivots:
        return None
    c = [0] * k
    for r, pc in zip(red, pivots):
        c[pc] = r[k]
    return c


# --------------------------------------------------------------------------
# linear codes


@dataclass(frozen=True)
class LinearCode:
    field: Field
    generator: tuple[tuple[int, ...], ...]
    n: int
    points: tuple[int, ...] | None = None

    def __post_init__(self):
        if any(len(r) != self.n for r in self.generator):
            raise FieldError("generator rows must have length n")
        if rank(self.field, self.generator) != len(self.generator):
            raise FieldError("generator rows are linearly dependent")

    @property
    def k(self) -> int:
        return len(self.generator)

    def encode(self, message: Sequence[int]) -> tuple[int, ...]:
        F = self.field
        out = [0] * self.n
        for m, row in zip(message, self.generator):
            if m:
                out = [F.add(o, F.mul(m, g)) for o, g in zip(out, row)]
        return tuple(out)

    def codewords(self) -> Iterable[tuple[int, ...]]:
        for msg in itertools.product(range(self.field.q), repeat=self.k):
            yield self.encode(msg)

    def contains(self, word: Sequence[int]) -> bool:
        return in_span(self.field, self.generator, word)

    @cached_property
    def min_distance(self) -> int:
        """Brute force over all nonzero codewords."""
        best = self.n + 1 if self.k == 0 else self.n
        for c in self.codewords():
            w = sum(1 for v in c if v)
            if 0 < w < best:
                best = w
        return best

    def dual(self) -> "LinearCode":
        basis = null_space(self.field, self.generator, self.n) if self.generator else [
            [int(i == j) for j in range(self.n)] for i in range(self.n)
        ]
        return LinearCode(self.field, tuple(tuple(r) for r in basis), self.n)

    def same_space(self, other: "LinearCode") -> bool:
        return (self.k == other.k and self.n == other.n
                and all(self.contains(r) for r in other.generator))


def rs_code(F: Field, n: int, k: int, points: Sequence[int] | None = None) -> LinearCode:
    """Reed-Solomon code: evaluations of polynomials of degree < k."""
    if points is None:
        points = tuple(range(n))
    points = tuple(points)
    if not (1 <= k <= n <= F.q) or len(points) != n:
        raise FieldError(f"need 1 <= k <= n <= q, got k={k} n={n} q={F.q}")
    if len(set(points)) != n:
        raise FieldError("evaluation points must be distinct")
    for x in points:
        F.check(x)
    gen = tuple(tuple(F.pow(x, i) if (x or i) else 1 for x in points) for i in range(k))
    return LinearCode(F, gen, n, points)


def rs_erasure_decode(code: LinearCode, known: Sequence[tuple[int, int]]) -> tuple[int, ...]:
    """Recover the unique codeword agreeing with ``known`` (position, value) pairs."""
    if code.points is None:
        raise FieldError("erasure decoding needs an evaluation-point code")
    F = code.field
    if len(known) < code.k:
        raise FieldError(f"need at least {code.k} known positions, got {len(known)}")
    pos = [p for p, _ in known]
    if len(set(pos)) != len(pos):
        raise FieldError("duplicate positions")
    poly = poly_interpolate(F, [(code.points[p], v) for p, v in known[: code.k]])
    word = tuple(poly(x) for x in code.points)
    for p, v in known:
        if word[p] != v:
            raise FieldError(f"known values are not consistent with any codeword (position {p})")
    return word


@dataclass(frozen=True)
class DualReport:
    dual: LinearCode
    contained: bool


def dual_and_subcode(c1: LinearCode, c2: LinearCode) -> DualReport:
    """Dual of ``c2`` and whether it lies inside ``c1``."""
    if c1.field != c2.field or c1.n != c2.n:
        raise FieldError("codes must share field and length")
    d = c2.dual()
    return DualReport(d, all(c1.contains(r) for r in d.generator))
