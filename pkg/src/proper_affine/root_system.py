"""Exact restricted root systems of classical type and their Weyl groups.

Vectors of the Cartan subspace and covectors on it share one set of
coordinates: the standard e-basis, with the Euclidean inner product.  All
arithmetic is done with :class:`fractions.Fraction`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction as Q
from typing import Iterable, Sequence

from .errors import BadInput, WeylGroupTooLarge

Vector = tuple[Q, ...]
Matrix = tuple[Vector, ...]

FAMILIES = ("A", "B", "C", "D", "BC")
DEFAULT_MAX_ORDER = 10**6


# ---------------------------------------------------------------------------
# small exact linear algebra helpers


def vec(xs: Iterable) -> Vector:
    return tuple(Q(x) for x in xs)


def dot(x: Sequence[Q], y: Sequence[Q]) -> Q:
    if len(x) != len(y):
        raise ValueError("dimension mismatch")
    return sum((a * b for a, b in zip(x, y)), Q(0))


def add(x: Vector, y: Vector) -> Vector:
    return tuple(a + b for a, b in zip(x, y))


def sub(x: Vector, y: Vector) -> Vector:
    return tuple(a - b for a, b in zip(x, y))


def scale(c, x: Vector) -> Vector:
    c = Q(c)
    return tuple(c * a for a in x)


def neg(x: Vector) -> Vector:
    return tuple(-a for a in x)


def zero(n: int) -> Vector:
    return tuple(Q(0) for _ in range(n))


def identity(n: int) -> Matrix:
    return tuple(tuple(Q(int(i == j)) for j in range(n)) for i in range(n))


def mat_vec(m: Matrix, x: Vector) -> Vector:
    return tuple(dot(row, x) for row in m)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(dot(row, col) for col in cols) for row in a)


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m))


def reflection_matrix(alpha: Vector) -> Matrix:
    """Matrix of the orthogonal reflection through the hyperplane alpha = 0."""
    n = len(alpha)
    c = Q(2) / dot(alpha, alpha)
    return tuple(
        tuple(Q(int(i == j)) - c * alpha[i] * alpha[j] for j in range(n)) for i in range(n)
    )


def reflect(v: Vector, alpha: Vector) -> Vector:
    c = 2 * dot(v, alpha) / dot(alpha, alpha)
    return tuple(a - c * b for a, b in zip(v, alpha))


def solve_exact(a: Sequence[Sequence[Q]], b: Sequence[Q]) -> Vector:
    """Solve a square nonsingular rational system by Gauss-Jordan elimination."""
    n = len(a)
    m = [[Q(x) for x in row] + [Q(y)] for row, y in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular system")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return tuple(m[r][n] for r in range(n))


def fmt_q(x: Q) -> str:
    """Rational number as a "p/q" string (integers print without denominator)."""
    return str(Q(x))


# ---------------------------------------------------------------------------
# root system data


@dataclass(frozen=True)
class RootSystemData:
    """Simple restricted roots, the full root set, fundamental weights and w0.

    ``factors`` lists the (family, rank) pairs of the irreducible factors in
    factor-major order; ``doubled[i]`` says whether twice the i-th simple root
    is itself a root (the BC case).
    """

    factors: tuple[tuple[str, int], ...]
    rank: int
    ambient_dim: int
    simple_roots: tuple[Vector, ...]
    positive_roots: tuple[Vector, ...]
    roots: tuple[Vector, ...]
    doubled: tuple[bool, ...]
    gram: Matrix
    fundamental_weights: tuple[Vector, ...]
    w0: Matrix
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def name(self) -> str:
        return "x".join(f"{f}{n}" for f, n in self.factors)

    @property
    def simple_roots_prime(self) -> tuple[Vector, ...]:
        """The alpha'_i: twice the simple root when that is a root, else the root."""
        return tuple(scale(2, a) if d else a for a, d in zip(self.simple_roots, self.doubled))

    def inner(self, x: Vector, y: Vector) -> Q:
        return dot(x, mat_vec(self.gram, y))

    def varpi_coords(self, weight: Vector) -> Vector:
        """Coordinates of a covector in the basis of fundamental weights."""
        return tuple(
            2 * self.inner(weight, ap) / self.inner(ap, ap) for ap in self.simple_roots_prime
        )

    def from_varpi(self, coords: Sequence) -> Vector:
        if len(coords) != self.rank:
            raise BadInput(f"expected {self.rank} fundamental-weight coordinates, got {len(coords)}")
        out = zero(self.ambient_dim)
        for c, w in zip(coords, self.fundamental_weights):
            out = add(out, scale(c, w))
        return out

    def root_coords(self, x: Vector) -> Vector:
        """Coordinates of x (assumed in the span of the roots) on the simple roots."""
        key = "root_coords_gram"
        if key not in self._cache:
            g = [[self.inner(a, b) for b in self.simple_roots] for a in self.simple_roots]
            self._cache[key] = g
        rhs = [self.inner(a, x) for a in self.simple_roots]
        return solve_exact(self._cache[key], rhs)

    def simple_values(self, x: Vector) -> Vector:
        """The values alpha_i(x) of the simple roots on a vector of the Cartan subspace."""
        return tuple(self.inner(a, x) for a in self.simple_roots)

    def is_dominant(self, x: Vector) -> bool:
        return all(v >= 0 for v in self.simple_values(x))

    def is_positive_root(self, alpha: Vector) -> bool:
        return alpha in set(self.positive_roots)

    def apply_w0(self, x: Vector) -> Vector:
        return mat_vec(self.w0, x)

    def dominant_representative(self, x: Vector) -> tuple[Vector, tuple[int, ...]]:
        """Reflect x into the closed dominant chamber; returns (dom, word used)."""
        word: list[int] = []
        cur = x
        while True:
            for i, a in enumerate(self.simple_roots):
                if self.inner(cur, a) < 0:
                    cur = reflect(cur, a)
                    word.append(i)
                    break
            else:
                return cur, tuple(word)

    def in_span(self, x: Vector) -> bool:
        """Whether x lies in the Cartan subspace (the span of the roots)."""
        for c in self.span_complement():
            if self.inner(c, x) != 0:
                return False
        return True

    def span_complement(self) -> tuple[Vector, ...]:
        """A basis of the orthogonal complement of the roots in the ambient space."""
        key = "complement"
        if key not in self._cache:
            comp = []
            offset = 0
            for fam, n in self.factors:
                dim = _ambient_dim(fam, n)
                if fam == "A":
                    v = [Q(0)] * self.ambient_dim
                    for k in range(offset, offset + dim):
                        v[k] = Q(1)
                    comp.append(tuple(v))
                offset += dim
            self._cache[key] = tuple(comp)
        return self._cache[key]

    def is_simply_laced(self) -> bool:
        lengths = {dot(a, a) for a in self.roots}
        return len(lengths) == 1

    def to_json(self) -> dict:
        return {
            "factors": [[f, n] for f, n in self.factors],
            "rank": self.rank,
            "ambient_dim": self.ambient_dim,
            "simple_roots": [[fmt_q(c) for c in a] for a in self.simple_roots],
            "doubled": list(self.doubled),
            "fundamental_weights": [[fmt_q(c) for c in w] for w in self.fundamental_weights],
            "w0": [[fmt_q(c) for c in row] for row in self.w0],
        }


@dataclass(frozen=True)
class WeylElement:
    matrix: Matrix
    word: tuple[int, ...] = ()

    def act(self, x: Vector) -> Vector:
        return mat_vec(self.matrix, x)


@dataclass(frozen=True)
class CartanVector:
    coords: Vector


# ---------------------------------------------------------------------------
# construction


def _ambient_dim(family: str, n: int) -> int:
    return n + 1 if family == "A" else n


def _e(i: int, dim: int) -> Vector:
    return tuple(Q(int(k == i)) for k in range(dim))


def _classical_data(family: str, n: int) -> tuple[list[Vector], list[Vector], list[bool]]:
    """Simple roots, positive roots and doubled flags in e-coordinates."""
    dim = _ambient_dim(family, n)
    e = [_e(i, dim) for i in range(dim)]
    simple: list[Vector] = [sub(e[i], e[i + 1]) for i in range(n - 1)]
    pos: list[Vector] = []
    doubled = [False] * n
    if family == "A":
        simple.append(sub(e[n - 1], e[n]))
        pos = [sub(e[i], e[j]) for i in range(dim) for j in range(i + 1, dim)]
        return simple, pos, doubled
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pm = [sub(e[i], e[j]) for i, j in pairs] + [add(e[i], e[j]) for i, j in pairs]
    if family == "B":
        simple.append(e[n - 1])
        pos = pm + [e[i] for i in range(n)]
    elif family == "C":
        simple.append(scale(2, e[n - 1]))
        pos = pm + [scale(2, e[i]) for i in range(n)]
    elif family == "D":
        if n == 1:
            raise BadInput("type D needs rank at least 2")
        simple.append(add(e[n - 2], e[n - 1]))
        pos = pm
    elif family == "BC":
        simple.append(e[n - 1])
        pos = pm + [e[i] for i in range(n)] + [scale(2, e[i]) for i in range(n)]
        doubled[n - 1] = True
    return simple, pos, doubled


def _longest_element(simple: Sequence[Vector], positive: Sequence[Vector], dim: int) -> Matrix:
    rho2 = zero(dim)
    for a in positive:
        rho2 = add(rho2, a)
    cur = neg(rho2)
    m = identity(dim)
    while True:
        for a in simple:
            if dot(cur, a) < 0:
                cur = reflect(cur, a)
                m = mat_mul(reflection_matrix(a), m)
                break
        else:
            return m


def _fundamental_weights(
    simple: Sequence[Vector], doubled: Sequence[bool], gram: Matrix
) -> tuple[Vector, ...]:
    # varpi_i = sum_k c_ik alpha_k with 2<varpi_i, alpha'_j>/|alpha'_j|^2 = delta_ij
    primes = [scale(2, a) if d else a for a, d in zip(simple, doubled)]
    ip = lambda x, y: dot(x, mat_vec(gram, y))  # noqa: E731
    r = len(simple)
    coeff = [[2 * ip(simple[k], ap) / ip(ap, ap) for k in range(r)] for ap in primes]
    out = []
    dim = len(simple[0])
    for i in range(r):
        rhs = [Q(int(i == j)) for j in range(r)]
        c = solve_exact(coeff, rhs)
        w = zero(dim)
        for ck, a in zip(c, simple):
            w = add(w, scale(ck, a))
        out.append(w)
    return tuple(out)


def _assemble(
    factors: tuple[tuple[str, int], ...],
    simple: list[Vector],
    positive: list[Vector],
    doubled: list[bool],
    dim: int,
) -> RootSystemData:
    gram = identity(dim)
    positive = sorted(set(positive), reverse=True)
    roots = tuple(positive) + tuple(neg(a) for a in positive)
    return RootSystemData(
        factors=factors,
        rank=len(simple),
        ambient_dim=dim,
        simple_roots=tuple(simple),
        positive_roots=tuple(positive),
        roots=roots,
        doubled=tuple(doubled),
        gram=gram,
        fundamental_weights=_fundamental_weights(simple, doubled, gram),
        w0=_longest_element(simple, positive, dim),
    )


def build_root_system(family: str, n: int) -> RootSystemData:
    """Root system of type A_n, B_n, C_n, D_n or BC_n in e-coordinates.

    Simple roots follow the usual ordering e1-e2, e2-e3, ..., ending with
    the family-specific last root (e_n, 2e_n, e_{n-1}+e_n or e_n).
    """
    family = family.upper()
    if family not in FAMILIES:
        raise BadInput(f"unsupported root system family {family!r}")
    if not isinstance(n, int) or n < 1:
        raise BadInput(f"rank must be a positive integer, got {n!r}")
    if family == "D" and n < 2:
        raise BadInput("type D needs rank at least 2")
    simple, pos, doubled = _classical_data(family, n)
    return _assemble(((family, n),), simple, pos, doubled, _ambient_dim(family, n))


def product_root_system(parts: Sequence[RootSystemData]) -> RootSystemData:
    """Orthogonal product, with simple roots in factor-major order."""
    if not parts:
        raise BadInput("product of an empty list of root systems")
    if len(parts) == 1:
        return parts[0]
    dim = sum(p.ambient_dim for p in parts)
    simple: list[Vector] = []
    pos: list[Vector] = []
    doubled: list[bool] = []
    factors: list[tuple[str, int]] = []
    offset = 0
    for p in parts:
        pad = lambda v: zero(offset) + v + zero(dim - offset - p.ambient_dim)  # noqa: E731
        simple += [pad(a) for a in p.simple_roots]
        pos += [pad(a) for a in p.positive_roots]
        doubled += list(p.doubled)
        factors += list(p.factors)
        offset += p.ambient_dim
    return _assemble(tuple(factors), simple, pos, doubled, dim)


def parse_root_system(text: str) -> RootSystemData:
    """Parse names such as ``"A3"``, ``"BC2"`` or ``"B2xB2"``."""
    parts = []
    for piece in text.replace("*", "x").split("x"):
        piece = piece.strip().upper()
        fam = piece.rstrip("0123456789")
        digits = piece[len(fam):]
        if not fam or not digits:
            raise BadInput(f"cannot parse root system {text!r}")
        parts.append(build_root_system(fam, int(digits)))
    return product_root_system(parts)


# ---------------------------------------------------------------------------
# Weyl group


def _closure(gens: Sequence[tuple[int, Matrix]], dim: int, max_order: int) -> list[WeylElement]:
    start = identity(dim)
    seen = {start: ()}
    queue = deque([start])
    while queue:
        m = queue.popleft()
        word = seen[m]
        for i, s in gens:
            nm = mat_mul(s, m)
            if nm not in seen:
                seen[nm] = (i,) + word
                if len(seen) > max_order:
                    raise WeylGroupTooLarge(len(seen), max_order)
                queue.append(nm)
    return [WeylElement(m, w) for m, w in seen.items()]


def weyl_group(rs: RootSystemData, max_order: int = DEFAULT_MAX_ORDER) -> list[WeylElement]:
    """All Weyl group elements, each with a reduced word in the simple reflections.

    Enumeration is breadth-first, so the stored word has minimal length.
    Results are cached on the root system for the default cap.
    """
    key = ("weyl", max_order)
    if key in rs._cache:
        return rs._cache[key]
    gens = [(i, reflection_matrix(a)) for i, a in enumerate(rs.simple_roots)]
    out = _closure(gens, rs.ambient_dim, max_order)
    rs._cache[key] = out
    return out


def parabolic_subgroup(
    rs: RootSystemData, indices: Iterable[int], max_order: int = DEFAULT_MAX_ORDER
) -> list[WeylElement]:
    """Subgroup generated by the simple reflections with the given indices."""
    gens = [(i, reflection_matrix(rs.simple_roots[i])) for i in sorted(set(indices))]
    return _closure(gens, rs.ambient_dim, max_order)


def stabilizer_in_W(
    rs: RootSystemData,
    target,
    pointwise: bool = True,
    group: Sequence[WeylElement] | None = None,
    max_order: int = DEFAULT_MAX_ORDER,
) -> list[WeylElement]:
    """Pointwise stabilizer of a vector, or setwise stabilizer of a set of covectors."""
    elems = weyl_group(rs, max_order) if group is None else group
    if pointwise:
        x = vec(target)
        return [w for w in elems if w.act(x) == x]
    s = frozenset(vec(t) for t in target)
    return [w for w in elems if frozenset(w.act(t) for t in s) == s]


def element_key(w: WeylElement) -> Matrix:
    return w.matrix
