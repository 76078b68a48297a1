"""Restricted weight sets of irreducible representations, exactly.

A representation is specified by its highest restricted weight.  The weight
set is the intersection of the lattice ``lambda + Z.Sigma`` with the convex
hull of the Weyl orbit of ``lambda``.  Hull membership is decided through the
dominance order: ``mu`` lies in ``Conv(W.lambda)`` iff ``lambda - dom(mu)``
is a nonnegative combination of simple roots, where ``dom(mu)`` is the
dominant element of the orbit of ``mu``.  An exact LP check is provided as
an independent route.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction as Q
from math import gcd
from typing import Iterable, Sequence

from .errors import BadInput, NotApplicable
from .root_system import (
    RootSystemData,
    Vector,
    add,
    dot,
    fmt_q,
    neg,
    scale,
    solve_exact,
    stabilizer_in_W,
    sub,
    vec,
    weyl_group,
    zero,
)

Weight = Vector


@dataclass(frozen=True)
class WeightSet:
    weights: frozenset
    highest: Weight
    multiplicities: dict | None = field(default=None, compare=False, hash=False)

    def __len__(self) -> int:
        return len(self.weights)

    def __contains__(self, w) -> bool:
        return tuple(w) in self.weights

    def __iter__(self):
        return iter(sorted(self.weights, reverse=True))

    @property
    def dimension(self) -> int | None:
        if self.multiplicities is None:
            return None
        return sum(self.multiplicities.values())

    def to_json(self) -> dict:
        out = {
            "highest": [fmt_q(c) for c in self.highest],
            "count": len(self.weights),
            "weights": [[fmt_q(c) for c in w] for w in self],
        }
        if self.multiplicities is not None:
            out["multiplicities"] = [
                {"weight": [fmt_q(c) for c in w], "mult": self.multiplicities[w]} for w in self
            ]
            out["dimension"] = self.dimension
        return out


@dataclass(frozen=True)
class RepClassification:
    zero_is_weight: bool
    limited: bool
    abundant: bool
    awkward: bool
    swinging: bool
    omega_w0: frozenset

    def to_json(self) -> dict:
        return {
            "zero_is_weight": self.zero_is_weight,
            "limited": self.limited,
            "abundant": self.abundant,
            "awkward": self.awkward,
            "swinging": self.swinging,
            "omega_w0": [[fmt_q(c) for c in w] for w in sorted(self.omega_w0, reverse=True)],
        }


# ---------------------------------------------------------------------------
# highest weights


def highest_from_varpi(rs: RootSystemData, coords: Sequence[int]) -> Weight:
    """Highest weight from its fundamental-weight coordinates (must be >= 0 integers)."""
    if len(coords) != rs.rank:
        raise BadInput(f"highest weight needs {rs.rank} coordinates, got {len(coords)}")
    for c in coords:
        if Q(c).denominator != 1 or Q(c) < 0:
            raise BadInput(f"highest weight must be dominant integral, got {list(coords)}")
    return rs.from_varpi(coords)


def _check_highest(rs: RootSystemData, highest: Weight) -> tuple[int, ...]:
    if len(highest) != rs.ambient_dim or not rs.in_span(highest):
        raise BadInput("highest weight is not a covector on the Cartan subspace")
    coords = rs.varpi_coords(highest)
    if any(c.denominator != 1 for c in coords):
        raise BadInput("highest weight is not in the restricted weight lattice")
    if any(c < 0 for c in coords):
        raise BadInput("highest weight is not dominant")
    return tuple(int(c) for c in coords)


class _VarpiTools:
    """Integer fundamental-weight arithmetic for fast lattice walks."""

    def __init__(self, rs: RootSystemData):
        self.rs = rs
        r = rs.rank
        # row j: varpi-coordinates of alpha_j and of alpha'_j
        self.alpha = [tuple(int(c) for c in rs.varpi_coords(a)) for a in rs.simple_roots]
        self.alpha_p = [tuple(int(c) for c in rs.varpi_coords(a)) for a in rs.simple_roots_prime]
        # inverse of the matrix with rows alpha, used to get root coordinates
        cols = [[Q(self.alpha[j][i]) for j in range(r)] for i in range(r)]
        self.inv_cols = [solve_exact(cols, [Q(int(i == k)) for i in range(r)]) for k in range(r)]

    def root_coords(self, x: Sequence[int]) -> tuple[Q, ...]:
        r = self.rs.rank
        return tuple(sum((self.inv_cols[k][j] * x[k] for k in range(r)), Q(0)) for j in range(r))

    def dominant(self, mu: Sequence[int]) -> tuple[int, ...]:
        mu = list(mu)
        while True:
            for i, c in enumerate(mu):
                if c < 0:
                    ap = self.alpha_p[i]
                    mu = [m - c * a for m, a in zip(mu, ap)]
                    break
            else:
                return tuple(mu)


def in_hull_dominance(rs: RootSystemData, highest: Weight, mu: Weight) -> bool:
    """Whether mu lies in Conv(W.highest), via the dominance order."""
    dom, _ = rs.dominant_representative(mu)
    return all(c >= 0 for c in rs.root_coords(sub(highest, dom)))


def _feasible_exact(a: list[list[Q]], b: list[Q]) -> bool:
    """Whether ``a t = b`` has a solution with ``t >= 0``.

    Phase-one simplex in exact arithmetic with Bland's rule, which cannot
    cycle.  (sympy's linprog cycles on some degenerate instances here.)
    """
    m, n = len(a), len(a[0])
    rows = []
    for row, rhs in zip(a, b):
        sign = -1 if rhs < 0 else 1
        rows.append([sign * x for x in row] + [sign * rhs])
    # tableau columns: n originals, m artificials, rhs
    tab = [r[:n] + [Q(int(i == k)) for k in range(m)] + [r[n]] for i, r in enumerate(rows)]
    basis = [n + i for i in range(m)]
    width = n + m
    while True:
        # reduced costs of the phase-one objective (sum of artificials)
        cost = [Q(0)] * width
        for j in range(width):
            c = Q(int(j >= n))
            for i in range(m):
                if basis[i] >= n:
                    c -= tab[i][j]
            cost[j] = c
        enter = next((j for j in range(width) if cost[j] < 0 and j not in basis), None)
        if enter is None:
            break
        ratios = [(tab[i][-1] / tab[i][enter], basis[i], i) for i in range(m) if tab[i][enter] > 0]
        if not ratios:
            break
        _, _, piv = min(ratios)
        p = tab[piv][enter]
        tab[piv] = [x / p for x in tab[piv]]
        for i in range(m):
            if i != piv and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[piv])]
        basis[piv] = enter
    residual = sum((tab[i][-1] for i in range(m) if basis[i] >= n), Q(0))
    return residual == 0


def in_hull_lp(rs: RootSystemData, highest: Weight, mu: Weight, orbit=None) -> bool:
    """Exact LP feasibility: mu = sum t_w w(highest), t >= 0, sum t = 1."""
    pts = sorted(orbit) if orbit is not None else sorted(weyl_orbit(rs, highest))
    pc = [rs.varpi_coords(p) for p in pts]
    a = [[p[k] for p in pc] for k in range(rs.rank)] + [[Q(1)] * len(pts)]
    b = list(rs.varpi_coords(mu)) + [Q(1)]
    return _feasible_exact(a, b)


def weyl_orbit(rs: RootSystemData, x: Vector) -> frozenset:
    """Orbit of x under W by reflection closure (no group enumeration)."""
    seen = {tuple(x)}
    stack = [tuple(x)]
    while stack:
        y = stack.pop()
        for a in rs.simple_roots:
            c = 2 * dot(y, a) / dot(a, a)
            if c:
                z = tuple(p - c * q for p, q in zip(y, a))
                if z not in seen:
                    seen.add(z)
                    stack.append(z)
    return frozenset(seen)


def weight_set(rs: RootSystemData, highest: Weight) -> WeightSet:
    """All restricted weights of the irreducible representation with this highest weight.

    Walks ``highest - sum c_i alpha_i`` over the box bounded by the root
    coordinates of ``highest - w0(highest)`` and keeps the points in the hull.

    Examples
    ========

    >>> from proper_affine.root_system import build_root_system
    >>> rs = build_root_system("A", 3)
    >>> len(weight_set(rs, highest_from_varpi(rs, [5, 0, 1])))
    119
    """
    highest = vec(highest)
    lam = _check_highest(rs, highest)
    tools = _VarpiTools(rs)
    bound = rs.root_coords(sub(highest, rs.apply_w0(highest)))
    bound = [int(b) for b in bound]
    r = rs.rank
    found: list[tuple[int, ...]] = []
    for c in itertools.product(*(range(b + 1) for b in bound)):
        mu = list(lam)
        for j, cj in enumerate(c):
            if cj:
                row = tools.alpha[j]
                for i in range(r):
                    mu[i] -= cj * row[i]
        dom = tools.dominant(mu)
        diff = [a - b for a, b in zip(lam, dom)]
        if all(x >= 0 for x in tools.root_coords(diff)):
            found.append(tuple(mu))
    weights = frozenset(rs.from_varpi(m) for m in found)
    return WeightSet(weights=weights, highest=highest)


# ---------------------------------------------------------------------------
# multiplicities (split case)


def _half_sum_positive(rs: RootSystemData) -> Vector:
    rho = zero(rs.ambient_dim)
    for a in rs.positive_roots:
        rho = add(rho, a)
    return scale(Q(1, 2), rho)


def multiplicities_split(rs: RootSystemData, highest: Weight, split: bool = True) -> WeightSet:
    """Weight multiplicities by Freudenthal's recursion.

    Works level by level below the highest weight using the positive roots
    only; it does not use the Weyl group or the hull test, so its support is
    an independent check on :func:`weight_set`.
    """
    if not split or any(rs.doubled):
        raise NotApplicable("multiplicities unavailable for non-split")
    highest = vec(highest)
    _check_highest(rs, highest)
    rho = _half_sum_positive(rs)
    # scale to integer coordinates; the recursion is homogeneous of degree 0
    den = 1
    for v in (highest, rho, *rs.positive_roots):
        for c in v:
            den = den * c.denominator // gcd(den, c.denominator)

    def to_int(v):
        return tuple(int(c * den) for c in v)

    def idot(x, y):
        return sum(a * b for a, b in zip(x, y))

    hi, ri = to_int(highest), to_int(rho)
    pos = [to_int(a) for a in rs.positive_roots]
    simple = [to_int(a) for a in rs.simple_roots]
    lr = tuple(a + b for a, b in zip(hi, ri))
    top = idot(lr, lr)
    mult: dict[tuple[int, ...], int] = {hi: 1}
    level = [hi]
    while level:
        cands = sorted({tuple(x - y for x, y in zip(m, a)) for m in level for a in simple}, reverse=True)
        nxt = []
        for mu in cands:
            mr = tuple(a + b for a, b in zip(mu, ri))
            denom = top - idot(mr, mr)
            total = 0
            for a in pos:
                cur = tuple(x + y for x, y in zip(mu, a))
                while cur in mult:
                    total += mult[cur] * idot(cur, a)
                    cur = tuple(x + y for x, y in zip(cur, a))
            if denom == 0:
                if total != 0:
                    raise ArithmeticError("Freudenthal recursion hit a zero denominator")
                continue
            if (2 * total) % denom:
                raise ArithmeticError(f"non-integral multiplicity at {mu}")
            m = 2 * total // denom
            if m < 0:
                raise ArithmeticError(f"negative multiplicity at {mu}")
            if m > 0:
                mult[mu] = m
                nxt.append(mu)
        level = nxt
    out = {tuple(Q(c, den) for c in w): m for w, m in mult.items()}
    return WeightSet(weights=frozenset(out), highest=highest, multiplicities=out)


def weyl_dimension(rs: RootSystemData, highest: Weight) -> int:
    """Dimension by the Weyl dimension formula (split case)."""
    if any(rs.doubled):
        raise NotApplicable("multiplicities unavailable for non-split")
    rho = _half_sum_positive(rs)
    lr = add(vec(highest), rho)
    out = Q(1)
    for a in rs.positive_roots:
        out *= dot(lr, a) / dot(rho, a)
    return int(out)


# ---------------------------------------------------------------------------
# classification


def _integer_multiple_of_root(rs: RootSystemData, w: Weight) -> bool:
    if not any(w):
        return True
    for a in rs.positive_roots:
        k = next(x / y for x, y in zip(w, a) if y != 0)
        if k.denominator == 1 and scale(k, a) == w:
            return True
    return False


def omega_w0(rs: RootSystemData, omega: WeightSet) -> frozenset:
    return frozenset(w for w in omega.weights if rs.apply_w0(w) == w)


def classify(rs: RootSystemData, omega: WeightSet) -> RepClassification:
    if not omega.weights:
        raise BadInput("empty weight set")
    z = zero(rs.ambient_dim)
    limited = all(_integer_multiple_of_root(rs, w) for w in omega.weights)
    abundant = z in omega.weights and all(a in omega.weights for a in rs.roots)
    fixed = omega_w0(rs, omega)
    return RepClassification(
        zero_is_weight=z in omega.weights,
        limited=limited,
        abundant=abundant,
        awkward=not limited and not abundant,
        swinging=bool(fixed - {z}),
        omega_w0=fixed,
    )


def roots_in_weights_check(rs: RootSystemData, omega: WeightSet) -> bool:
    """Whether every root is a weight; only meaningful for simple simply-laced systems."""
    z = zero(rs.ambient_dim)
    if len(rs.factors) != 1 or not rs.is_simply_laced():
        raise NotApplicable("roots-in-weights check needs a simple simply-laced root system")
    if z not in omega.weights or len(omega.weights) < 2:
        raise NotApplicable("roots-in-weights check needs 0 to be a weight of a nontrivial rep")
    return all(a in omega.weights for a in rs.roots)


def is_w_invariant(rs: RootSystemData, weights: Iterable[Weight]) -> bool:
    from .root_system import reflect

    s = frozenset(weights)
    return all(reflect(w, a) in s for a in rs.simple_roots for w in s)


def lattice_hull_bruteforce(rs: RootSystemData, highest: Weight) -> frozenset:
    """Oracle: enumerate the same box but decide hull membership by exact LP."""
    highest = vec(highest)
    orbit = weyl_orbit(rs, highest)
    bound = [int(b) for b in rs.root_coords(sub(highest, rs.apply_w0(highest)))]
    out = set()
    for c in itertools.product(*(range(b + 1) for b in bound)):
        mu = highest
        for cj, a in zip(c, rs.simple_roots):
            mu = sub(mu, scale(cj, a))
        if in_hull_lp(rs, highest, mu, orbit):
            out.add(mu)
    return frozenset(out)


def fundamental_type_structure(rs: RootSystemData, omega: WeightSet, i: int) -> bool:
    """Check that every non-highest weight is ``highest - alpha_i - sum c_j alpha_j``, c_j >= 0.

    Meant for weight sets whose highest weight is a multiple of varpi_i.
    """
    for w in omega.weights:
        if w == omega.highest:
            continue
        c = list(rs.root_coords(sub(omega.highest, w)))
        c[i] -= 1
        if any(x < 0 for x in c):
            return False
    return True


__all__ = [
    "Weight",
    "WeightSet",
    "RepClassification",
    "highest_from_varpi",
    "weight_set",
    "multiplicities_split",
    "weyl_dimension",
    "classify",
    "omega_w0",
    "roots_in_weights_check",
    "in_hull_dominance",
    "in_hull_lp",
    "weyl_orbit",
    "is_w_invariant",
    "lattice_hull_bruteforce",
    "fundamental_type_structure",
    "stabilizer_in_W",
    "weyl_group",
    "neg",
]
