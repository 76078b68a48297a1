"""Choice of the reference vector X0 and the sign conditions built on it.

Everything here is exact: vectors of the Cartan subspace and weights are
Fraction tuples in e-coordinates, and ``lambda(X)`` is the dot product.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction as Q
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .errors import BadInput, LemmaViolated, NotApplicable
from .rep_weights import WeightSet, omega_w0
from .root_system import (
    RootSystemData,
    Vector,
    WeylElement,
    add,
    dot,
    fmt_q,
    neg,
    parabolic_subgroup,
    scale,
    solve_exact,
    sub,
    vec,
    weyl_group,
    zero,
)


@dataclass(frozen=True)
class TypePartition:
    gt: frozenset
    eq: frozenset
    lt: frozenset

    @property
    def ge(self) -> frozenset:
        return self.gt | self.eq

    @property
    def le(self) -> frozenset:
        return self.lt | self.eq

    def to_json(self) -> dict:
        enc = lambda s: [[fmt_q(c) for c in w] for w in sorted(s, reverse=True)]  # noqa: E731
        return {"gt": enc(self.gt), "eq": enc(self.eq), "lt": enc(self.lt)}


Pair = tuple[Vector, Vector]


@dataclass(frozen=True)
class X0Certificate:
    x0: Vector
    symmetric: bool
    generically_symmetric: bool
    extreme: bool
    partition: TypePartition
    pi_x0: tuple[int, ...]
    w_x0: tuple[int, ...]
    pairs_weak: dict
    pairs_strong: dict
    candidates_weak: dict = field(default_factory=dict, compare=False)
    candidates_strong: dict = field(default_factory=dict, compare=False)
    rs: RootSystemData | None = field(default=None, compare=False, repr=False)
    omega: WeightSet | None = field(default=None, compare=False, repr=False)

    def pi_x0_roots(self) -> list[Vector]:
        return [self.rs.simple_roots[i] for i in self.pi_x0]

    def to_json(self) -> dict:
        enc = lambda w: [fmt_q(c) for c in w]  # noqa: E731

        def pairs(d):
            return {
                str(i): {"root": enc(self.rs.simple_roots[i]), "ge": enc(p[0]), "lt": enc(p[1])}
                for i, p in sorted(d.items())
            }

        def cands(d):
            return {str(i): [[enc(a), enc(b)] for a, b in v] for i, v in sorted(d.items())}

        return {
            "x0": enc(self.x0),
            "symmetric": self.symmetric,
            "generically_symmetric": self.generically_symmetric,
            "extreme": self.extreme,
            "pi_x0": [enc(a) for a in self.pi_x0_roots()],
            "pi_x0_indices": list(self.pi_x0),
            "w_x0_generators": list(self.w_x0),
            "partition": self.partition.to_json(),
            "pairs_weak": pairs(self.pairs_weak),
            "pairs_strong": pairs(self.pairs_strong),
            "candidates_weak": cands(self.candidates_weak),
            "candidates_strong": cands(self.candidates_strong),
        }


def _weights(omega) -> frozenset:
    return omega.weights if isinstance(omega, WeightSet) else frozenset(vec(w) for w in omega)


def type_partition(omega, x: Sequence) -> TypePartition:
    x = vec(x)
    gt, eq, lt = set(), set(), set()
    for w in _weights(omega):
        if len(w) != len(x):
            raise BadInput("weight and vector dimensions differ")
        v = dot(w, x)
        (gt if v > 0 else lt if v < 0 else eq).add(w)
    return TypePartition(frozenset(gt), frozenset(eq), frozenset(lt))


# ---------------------------------------------------------------------------
# symmetric vectors


def fundamental_coweights(rs: RootSystemData) -> tuple[Vector, ...]:
    """Vectors w_i of the Cartan subspace with alpha_j(w_i) = delta_ij."""
    g = [[rs.inner(a, b) for b in rs.simple_roots] for a in rs.simple_roots]
    out = []
    for i in range(rs.rank):
        c = solve_exact(g, [Q(int(i == j)) for j in range(rs.rank)])
        w = zero(rs.ambient_dim)
        for ck, a in zip(c, rs.simple_roots):
            w = add(w, scale(ck, a))
        out.append(w)
    return tuple(out)


def opposition(rs: RootSystemData) -> tuple[int, ...]:
    """The permutation sigma of simple roots with -w0(alpha_i) = alpha_sigma(i)."""
    idx = {a: i for i, a in enumerate(rs.simple_roots)}
    return tuple(idx[neg(rs.apply_w0(a))] for a in rs.simple_roots)


def is_symmetric(rs: RootSystemData, x: Vector) -> bool:
    return neg(rs.apply_w0(x)) == tuple(x)


def is_generically_symmetric(rs: RootSystemData, omega, x: Vector) -> bool:
    return is_symmetric(rs, x) and type_partition(omega, x).eq == _fixed(rs, omega)


def _fixed(rs: RootSystemData, omega) -> frozenset:
    return frozenset(w for w in _weights(omega) if rs.apply_w0(w) == w)


def _require_nontrivial(rs: RootSystemData, omega) -> None:
    ws = _weights(omega)
    if ws <= {zero(rs.ambient_dim)} or rs.rank == 0:
        raise NotApplicable("criterion trivially fails: the representation has no nonzero weight")
    if zero(rs.ambient_dim) not in ws:
        raise NotApplicable("criterion trivially fails: 0 is not a restricted weight")


def find_generically_symmetric(
    rs: RootSystemData, omega, seed: int = 0, max_tries: int = 10_000
) -> Vector:
    """Seeded search for a dominant X with -w0 X = X and Omega^=_X = Omega^{w0}.

    Candidates are ``sum c_i (w_i + w_sigma(i))`` over the fundamental
    coweights with random positive integer coefficients, one per
    sigma-orbit, so every candidate is symmetric and strictly dominant.
    """
    _require_nontrivial(rs, omega)
    cw = fundamental_coweights(rs)
    sigma = opposition(rs)
    orbits = sorted({tuple(sorted({i, sigma[i]})) for i in range(rs.rank)})
    rng = random.Random(seed)
    target = _fixed(rs, omega)
    for _ in range(max_tries):
        x = zero(rs.ambient_dim)
        for orb in orbits:
            c = rng.randint(1, 9)
            for i in orb:
                x = add(x, scale(c, cw[i]))
        if type_partition(omega, x).eq == target:
            return _primitive(x)
    raise LemmaViolated("no generically symmetric vector found; the search space is too coarse")


def _primitive(x: Vector) -> Vector:
    """Positive rescaling of a rational vector to a primitive integer vector."""
    if not any(x):
        return x
    den = 1
    for c in x:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in x]
    g = 0
    for c in ints:
        g = gcd(g, abs(c))
    return tuple(Q(c, g) for c in ints)


# ---------------------------------------------------------------------------
# extreme vectors


def _weyl_stack(rs: RootSystemData, group: Sequence[WeylElement]):
    """Group matrices as an exact int64 array (Weyl matrices here are integral)."""
    key = ("weyl_stack", id(group))
    hit = rs._cache.get(key)
    if hit is not None and hit[0] is group:
        return hit[1]
    for g in group:
        if any(c.denominator != 1 for row in g.matrix for c in row):
            raise BadInput("non-integral Weyl matrix")
    arr = np.array([[[int(c) for c in row] for row in g.matrix] for g in group], dtype=np.int64)
    rs._cache[key] = (group, arr)
    return arr


def _int_scaled(vectors: Sequence[Vector]):
    den = 1
    for v in vectors:
        for c in v:
            den = den * c.denominator // gcd(den, c.denominator)
    return np.array([[int(c * den) for c in v] for v in vectors], dtype=np.int64)


def same_type_stabilizer(
    rs: RootSystemData, omega, x: Vector, group: Sequence[WeylElement] | None = None
) -> list[WeylElement]:
    """W_{rho,X}: elements w with wX of the same type as X."""
    elems = weyl_group(rs) if group is None else group
    stack = _weyl_stack(rs, elems)
    ws = _int_scaled(sorted(_weights(omega)))
    xv = _int_scaled([vec(x)])[0]
    signs = np.sign((stack @ xv) @ ws.T)
    ref = np.sign(ws @ xv)
    keep = np.all(signs == ref, axis=1)
    return [g for g, k in zip(elems, keep) if k]


def pointwise_stabilizer(rs: RootSystemData, x: Vector, group=None) -> list[WeylElement]:
    elems = weyl_group(rs) if group is None else group
    stack = _weyl_stack(rs, elems)
    xv = _int_scaled([vec(x)])[0]
    keep = np.all(stack @ xv == xv, axis=1)
    return [g for g, k in zip(elems, keep) if k]


def is_extreme(rs: RootSystemData, omega, x: Vector) -> bool:
    return len(pointwise_stabilizer(rs, x)) == len(same_type_stabilizer(rs, omega, x))


def extremize(rs: RootSystemData, omega, x: Vector, max_rounds: int = 32) -> Vector:
    """Average X over W_{rho,X} until W_X = W_{rho,X}; result rescaled to a primitive integer vector."""
    x = vec(x)
    for _ in range(max_rounds):
        stab = same_type_stabilizer(rs, omega, x)
        if len(pointwise_stabilizer(rs, x)) == len(stab):
            return _primitive(x)
        total = zero(rs.ambient_dim)
        for g in stab:
            total = add(total, g.act(x))
        x = scale(Q(1, len(stab)), total)
    raise LemmaViolated("averaging did not reach an extreme vector")


def pi_of(rs: RootSystemData, x: Vector) -> tuple[int, ...]:
    """Indices of simple roots vanishing on x."""
    return tuple(i for i, a in enumerate(rs.simple_roots) if rs.inner(a, x) == 0)


# ---------------------------------------------------------------------------
# departure pairs


def depart_pairs(
    rs: RootSystemData, omega, x0: Vector, pi_x0: Iterable[int] | None = None
) -> tuple[dict, dict, dict, dict]:
    """Weak and strong weight pairs with difference alpha_i, for i outside Pi_{X0}.

    Returns ``(weak, strong, all_weak, all_strong)``.  When several pairs
    qualify, the chosen one has the lexicographically largest lambda^<.
    """
    x0 = vec(x0)
    pi = set(pi_of(rs, x0) if pi_x0 is None else pi_x0)
    part = type_partition(omega, x0)
    z = zero(rs.ambient_dim)
    ge, gt0 = part.ge, part.gt | ({z} & part.eq)
    weak, strong, all_weak, all_strong = {}, {}, {}, {}
    for i, a in enumerate(rs.simple_roots):
        if i in pi:
            continue
        cw = sorted(((add(lt, a), lt) for lt in part.lt if add(lt, a) in ge), key=lambda p: p[1], reverse=True)
        cs = [p for p in cw if p[0] in gt0]
        if not cw or not cs:
            raise LemmaViolated(f"lemma violated: no departure pair for simple root {i}")
        all_weak[i], all_strong[i] = cw, cs
        weak[i], strong[i] = cw[0], cs[0]
    return weak, strong, all_weak, all_strong


def certify(rs: RootSystemData, omega, x0: Sequence) -> X0Certificate:
    """Evaluate every X0 predicate for a given vector; pairs only when the lemma applies."""
    x0 = vec(x0)
    if len(x0) != rs.ambient_dim or not rs.in_span(x0):
        raise BadInput("X0 is not a vector of the Cartan subspace")
    part = type_partition(omega, x0)
    sym = is_symmetric(rs, x0)
    gsym = sym and part.eq == _fixed(rs, omega)
    ext = is_extreme(rs, omega, x0)
    pi = pi_of(rs, x0)
    weak = strong = aw = ast = {}
    if gsym and ext and rs.is_dominant(x0):
        weak, strong, aw, ast = depart_pairs(rs, omega, x0, pi)
    return X0Certificate(
        x0=x0,
        symmetric=sym,
        generically_symmetric=gsym,
        extreme=ext,
        partition=part,
        pi_x0=pi,
        w_x0=pi,
        pairs_weak=weak,
        pairs_strong=strong,
        candidates_weak=aw,
        candidates_strong=ast,
        rs=rs,
        omega=omega if isinstance(omega, WeightSet) else None,
    )


def select_x0(rs: RootSystemData, omega, seed: int = 0) -> X0Certificate:
    """Generically symmetric search, then averaging, then the certificate."""
    x = find_generically_symmetric(rs, omega, seed)
    return certify(rs, omega, extremize(rs, omega, x))


# ---------------------------------------------------------------------------
# predicates on Y


@dataclass(frozen=True)
class VectorPredicates:
    x0_regular: bool
    rho_regular: bool
    asymptotically_contracting: bool
    compatible: bool
    vanishing_weights: tuple = ()
    vanishing_roots: tuple = ()

    def to_json(self) -> dict:
        enc = lambda w: [fmt_q(c) if isinstance(c, Q) else repr(float(c)) for c in w]  # noqa: E731
        return {
            "x0_regular": self.x0_regular,
            "rho_regular": self.rho_regular,
            "asymptotically_contracting": self.asymptotically_contracting,
            "compatible": self.compatible,
            "vanishing_weights": [enc(w) for w in self.vanishing_weights],
            "vanishing_roots": [enc(a) for a in self.vanishing_roots],
        }


def vector_predicates(cert: X0Certificate, y: Sequence, tol: float = 1e-9) -> VectorPredicates:
    """The four regularity predicates of Y against X0.

    Exact when Y has rational entries; with float entries a value counts as
    zero when its modulus is at most ``tol * max|Y|``.
    """
    rs = cert.rs
    exact = all(isinstance(c, (int, Q)) for c in y)
    if exact:
        y = vec(y)
        ev = lambda w: dot(w, y)  # noqa: E731
        eps = 0
    else:
        y = tuple(float(c) for c in y)
        ev = lambda w: sum(float(a) * b for a, b in zip(w, y))  # noqa: E731
        eps = tol * max(1.0, max(abs(c) for c in y))
    part = cert.partition
    pi = set(cert.pi_x0)
    bad_roots = tuple(
        a for i, a in enumerate(rs.simple_roots) if i not in pi and abs(ev(a)) <= eps
    )
    vanish = tuple(
        sorted((w for w in part.gt | part.lt if abs(ev(w)) <= eps), reverse=True)
    )
    x0_reg = not bad_roots
    lt_vals = [ev(w) for w in part.lt]
    ge_vals = [ev(w) for w in part.ge]
    gt_vals = [ev(w) for w in part.gt]
    asym = not lt_vals or not ge_vals or max(lt_vals) < min(ge_vals) - eps
    compat = all(v < -eps for v in lt_vals) and all(v > eps for v in gt_vals)
    return VectorPredicates(
        x0_regular=x0_reg,
        rho_regular=x0_reg and not vanish,
        asymptotically_contracting=asym,
        compatible=compat,
        vanishing_weights=vanish,
        vanishing_roots=bad_roots,
    )


def compatible_cone_sample(cert: X0Certificate, seed: int = 0) -> Vector:
    """A strictly dominant rational vector compatible with X0, deterministic per seed.

    Returns X0 itself when it is already strictly dominant; otherwise
    ``X0 + eps Z`` for a seeded strictly dominant Z, halving eps until the
    compatibility inequalities hold.
    """
    rs = cert.rs
    x0 = cert.x0
    if not cert.pi_x0:
        return x0
    rng = random.Random(seed)
    cw = fundamental_coweights(rs)
    zdir = zero(rs.ambient_dim)
    for w in cw:
        zdir = add(zdir, scale(rng.randint(1, 9), w))
    eps = Q(1)
    for _ in range(200):
        y = add(x0, scale(eps, zdir))
        p = vector_predicates(cert, y)
        if p.compatible and all(v > 0 for v in rs.simple_values(y)):
            return _primitive(y)
        eps /= 2
    raise LemmaViolated("compatible cone appears empty")


def stabilizer_checks(cert: X0Certificate) -> dict:
    """Setwise stabilizers of the four partition pieces, compared with W_{X0}."""
    rs = cert.rs
    group = weyl_group(rs)
    stack = _weyl_stack(rs, group)
    wx = {g.matrix for g in pointwise_stabilizer(rs, cert.x0, group)}
    part = cert.partition
    out = {}
    for name, s in (("ge", part.ge), ("gt", part.gt), ("le", part.le), ("lt", part.lt)):
        pts = sorted(s)
        if not pts:
            out[name] = len(wx) == len(group)
            continue
        ints = _int_scaled(pts)
        ref = {tuple(r) for r in ints.tolist()}
        imgs = np.einsum("gij,sj->gsi", stack, ints)
        stab = {g.matrix for g, im in zip(group, imgs) if {tuple(r) for r in im.tolist()} == ref}
        out[name] = stab == wx
    chev = {g.matrix for g in parabolic_subgroup(rs, cert.pi_x0)}
    out["chevalley"] = chev == wx
    return out


def pi_from_missing_roots(rs: RootSystemData, omega) -> tuple[int, ...]:
    """Simple roots that are not weights; equals Pi_{X0} for non-awkward representations."""
    ws = _weights(omega)
    return tuple(i for i, a in enumerate(rs.simple_roots) if a not in ws)
