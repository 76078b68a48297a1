"""Matrix realizations of (G, rho, V) for the fixture families.

Supported groups, each given by its standard matrix representation:

* ``SL``: SL_n(R), restricted root system A_{n-1}, Cartan subspace the
  traceless diagonal matrices.
* ``SO``: SO+(p, q) with p > q >= 1, preserving diag(I_p, -I_q); Cartan
  subspace spanned by the boosts in the (j, p+j) planes; restricted root
  system B_q.
* ``SOc``: compact SO(n), real rank 0.

Representations: ``standard``, ``sym`` (degree k), ``wedge`` (degree k),
``adjoint`` and ``trivial``.  Every V is expressed in an orthonormal basis
of joint eigenvectors of the Cartan subspace (a weight basis), so the
weight spaces are orthogonal and K acts by orthogonal matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction as Q
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import BadInput, NearDegenerate
from .rep_weights import WeightSet, multiplicities_split, weight_set
from .root_system import RootSystemData, Vector, build_root_system, fmt_q, vec, zero

RANK_TOL = 1e-8
WEIGHT_TOL = 1e-9


# ---------------------------------------------------------------------------
# tensor constructions


def _perm_sign(p: Sequence[int]) -> int:
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def _flat_index(idx: Sequence[int], n: int) -> int:
    out = 0
    for i in idx:
        out = out * n + i
    return out


def sym_embedding(n: int, k: int) -> np.ndarray:
    """Orthonormal basis of symmetric k-tensors, one column per monomial (graded-lex order)."""
    cols = []
    for combo in itertools.combinations_with_replacement(range(n), k):
        col = np.zeros(n**k)
        for perm in set(itertools.permutations(combo)):
            col[_flat_index(perm, n)] = 1.0
        cols.append(col / np.linalg.norm(col))
    return np.array(cols).T.reshape(n**k, -1) if cols else np.zeros((n**k, 0))


def wedge_embedding(n: int, k: int) -> np.ndarray:
    cols = []
    for combo in itertools.combinations(range(n), k):
        col = np.zeros(n**k)
        for perm in itertools.permutations(range(k)):
            col[_flat_index([combo[i] for i in perm], n)] = _perm_sign(perm)
        cols.append(col / math.sqrt(math.factorial(k)))
    return np.array(cols).T.reshape(n**k, -1)


def kron_power(g: np.ndarray, k: int) -> np.ndarray:
    out = np.ones((1, 1))
    for _ in range(k):
        out = np.kron(out, g)
    return out


def kron_derivation(x: np.ndarray, k: int) -> np.ndarray:
    n = x.shape[0]
    out = np.zeros((n**k, n**k))
    for m in range(k):
        out += np.kron(np.kron(np.eye(n**m), x), np.eye(n ** (k - m - 1)))
    return out


def compound(g: np.ndarray, k: int) -> np.ndarray:
    """k-th exterior power of g in the basis e_I, I increasing (all k x k minors)."""
    n = g.shape[0]
    subsets = list(itertools.combinations(range(n), k))
    out = np.empty((len(subsets), len(subsets)))
    for a, rows in enumerate(subsets):
        for b, cols in enumerate(subsets):
            out[a, b] = np.linalg.det(g[np.ix_(rows, cols)])
    return out


def null_space(mat: np.ndarray, rel_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the null space, thresholding singular values at rel_tol * sigma_max."""
    if mat.size == 0:
        return np.eye(mat.shape[1])
    _, s, vt = np.linalg.svd(mat)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rel_tol * smax)) if smax > 0 else 0
    return vt[rank:].T.copy()


# ---------------------------------------------------------------------------
# group families


@dataclass(frozen=True)
class GroupFamily:
    """Standard representation data of a fixture group."""

    kind: str
    n: int
    p: int = 0
    q: int = 0

    @property
    def name(self) -> str:
        if self.kind == "SL":
            return f"SL{self.n}"
        if self.kind == "SO":
            return f"SO({self.p},{self.q})"
        return f"SO{self.n}"

    @property
    def form(self) -> np.ndarray:
        if self.kind == "SO":
            return np.diag([1.0] * self.p + [-1.0] * self.q)
        return np.eye(self.n)

    def root_system(self) -> RootSystemData | None:
        if self.kind == "SL":
            return build_root_system("A", self.n - 1)
        if self.kind == "SO":
            return build_root_system("B", self.q)
        return None

    def cartan_coordinate(self, k: int) -> np.ndarray:
        """Matrix of the k-th ambient coordinate direction of the Cartan subspace."""
        m = np.zeros((self.n, self.n))
        if self.kind == "SL":
            m[k, k] = 1.0
        elif self.kind == "SO":
            m[k, self.p + k] = m[self.p + k, k] = 1.0
        return m

    @property
    def ambient_dim(self) -> int:
        return self.n if self.kind == "SL" else (self.q if self.kind == "SO" else 0)

    def exp_cartan(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray([float(c) for c in x])
        if self.kind == "SL":
            return np.diag(np.exp(x - x.mean()))
        g = np.eye(self.n)
        for j, t in enumerate(x):
            a, b = j, self.p + j
            g[a, a] = g[b, b] = math.cosh(t)
            g[a, b] = g[b, a] = math.sinh(t)
        return g

    def w0_std(self) -> np.ndarray:
        if self.kind == "SL":
            w = np.fliplr(np.eye(self.n))
            if np.linalg.det(w) < 0:
                w[:, -1] *= -1
            return w
        if self.kind == "SO":
            d = np.ones(self.n)
            d[: self.q] = -1
            if self.q % 2:
                d[self.q] *= -1  # first neutral coordinate keeps det = 1 on the positive block
            return np.diag(d)
        return np.eye(self.n)

    def m_generators_std(self) -> list[np.ndarray]:
        """Generators of M = Z_K(A) (a dense subgroup for the compact factors)."""
        gens = []
        if self.kind == "SL":
            for j in range(1, self.n):
                d = np.ones(self.n)
                d[0] = d[j] = -1
                gens.append(np.diag(d))
        elif self.kind == "SO":
            for j in range(1, self.q):
                d = np.ones(self.n)
                for c in (0, j, self.p, self.p + j):
                    d[c] = -1
                gens.append(np.diag(d))
            gens += [_givens(self.n, a, a + 1, 1.0) for a in range(self.q, self.p - 1)]
        else:
            gens += [_givens(self.n, a, a + 1, 1.0) for a in range(self.n - 1)]
        return gens

    def random_k(self, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "SO":
            k = np.eye(self.n)
            k[: self.p, : self.p] = _random_so(self.p, rng)
            k[self.p :, self.p :] = _random_so(self.q, rng)
            return k
        return _random_so(self.n, rng)

    def fundamental_reps(self) -> list[tuple[Callable[[np.ndarray], np.ndarray], int]]:
        """Per simple root i, a representation with highest weight n_i varpi_i and n_i."""
        if self.kind == "SL":
            return [((lambda g, k=k: compound(g, k)), 1) for k in range(1, self.n)]
        if self.kind == "SO":
            return [
                ((lambda g, k=k: compound(g, k)), 2 if k == self.q else 1) for k in range(1, self.q + 1)
            ]
        return []

    def is_member(self, g: np.ndarray, tol: float = 1e-8) -> bool:
        g = np.asarray(g, dtype=float)
        if g.shape != (self.n, self.n):
            return False
        scale = max(1.0, np.linalg.norm(g) ** 2)
        if self.kind == "SL":
            return abs(np.linalg.det(g) - 1) <= tol * scale ** (self.n / 2)
        j = self.form
        if np.linalg.norm(g.T @ j @ g - j) > tol * scale:
            return False
        if self.kind == "SOc":
            return np.linalg.det(g) > 0
        return np.linalg.det(g[: self.p, : self.p]) > 0 and np.linalg.det(g[self.p :, self.p :]) > 0


def _givens(n: int, a: int, b: int, t: float) -> np.ndarray:
    g = np.eye(n)
    c, s = math.cos(t), math.sin(t)
    g[a, a] = g[b, b] = c
    g[a, b], g[b, a] = -s, s
    return g


def _random_so(n: int, rng: np.random.Generator) -> np.ndarray:
    if n == 1:
        return np.eye(1)
    qm, r = np.linalg.qr(rng.standard_normal((n, n)))
    qm = qm @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(qm) < 0:
        qm[:, 0] *= -1
    return qm


def lie_algebra_basis(fam: GroupFamily) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of the Lie algebra of the standard group."""
    n = fam.n
    if fam.kind == "SL":
        mats = []
        for i in range(n):
            for j in range(n):
                if i != j:
                    m = np.zeros((n, n))
                    m[i, j] = 1.0
                    mats.append(m)
        for i in range(n - 1):
            d = np.zeros(n)
            d[: i + 1] = 1.0
            d[i + 1] = -(i + 1)
            mats.append(np.diag(d / np.linalg.norm(d)))
        return mats
    j = fam.form
    mats = []
    for a in range(n):
        for b in range(a + 1, n):
            m = np.zeros((n, n))
            m[a, b] = 1.0
            m[b, a] = -j[a, a] * j[b, b]
            mats.append(m / np.linalg.norm(m))
    return mats


# ---------------------------------------------------------------------------
# representations


@dataclass(frozen=True)
class RepSpec:
    group: str
    n: int = 0
    p: int = 0
    q: int = 0
    rep_kind: str = "standard"
    degree: int = 1

    def family(self) -> GroupFamily:
        g = self.group.upper()
        if g == "SL":
            if self.n < 2:
                raise BadInput("SL_n needs n >= 2")
            return GroupFamily("SL", self.n)
        if g == "SO":
            if not (self.p > self.q >= 1):
                raise BadInput("SO(p,q) fixtures need p > q >= 1")
            return GroupFamily("SO", self.p + self.q, self.p, self.q)
        if g in ("SOC", "SO_COMPACT", "COMPACT"):
            if self.n < 2:
                raise BadInput("compact SO(n) needs n >= 2")
            return GroupFamily("SOc", self.n)
        raise BadInput(f"unsupported group {self.group!r}")

    @property
    def label(self) -> str:
        fam = self.family()
        kind = self.rep_kind if self.rep_kind in ("standard", "adjoint", "trivial") else f"{self.rep_kind}{self.degree}"
        return f"{fam.name}:{kind}"


@dataclass
class ConcreteRep:
    spec: RepSpec
    fam: GroupFamily
    rs: RootSystemData | None
    dim_v: int
    weights: list  # weight (Fraction tuple) of each basis vector
    basis: np.ndarray  # raw coordinates -> weight basis (orthonormal columns)
    raw: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    cartan_coord: list = field(default_factory=list, repr=False)
    highest: Vector | None = None
    _omega: WeightSet | None = field(default=None, repr=False)

    @property
    def name(self) -> str:
        return self.spec.label

    def rho(self, g: np.ndarray) -> np.ndarray:
        """Action of a standard-representation matrix on V, in the weight basis."""
        return self.basis.T @ self.raw(np.asarray(g, dtype=float)) @ self.basis

    def cartan_action(self, x: Sequence[float]) -> np.ndarray:
        out = np.zeros((self.dim_v, self.dim_v))
        for c, d in zip(x, self.cartan_coord):
            out += float(c) * d
        return out

    @property
    def cartan_basis(self) -> list[np.ndarray]:
        """Action of the simple-root directions, a basis of the Cartan subspace."""
        if self.rs is None:
            return []
        return [self.cartan_action(a) for a in self.rs.simple_roots]

    @property
    def gram_v(self) -> np.ndarray:
        return np.eye(self.dim_v)

    @property
    def w0_rep(self) -> np.ndarray:
        return self.rho(self.fam.w0_std())

    @property
    def m_generators(self) -> list[np.ndarray]:
        return [self.rho(m) for m in self.fam.m_generators_std()]

    @property
    def weight_decomp(self) -> dict:
        out: dict = {}
        for i, w in enumerate(self.weights):
            out.setdefault(w, []).append(i)
        return {w: np.eye(self.dim_v)[:, idx] for w, idx in out.items()}

    def indices(self, predicate) -> list[int]:
        return [i for i, w in enumerate(self.weights) if predicate(w)]

    @property
    def omega(self) -> WeightSet:
        if self._omega is None:
            if self.rs is None:
                ws = frozenset(self.weights)
                self._omega = WeightSet(ws, highest=())
            elif self.highest is None:
                self._omega = WeightSet(frozenset(self.weights), highest=max(self.weights))
            else:
                self._omega = weight_set(self.rs, self.highest)
        return self._omega

    def fundamental_type_reps(self):
        return self.fam.fundamental_reps()

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dim_v": self.dim_v,
            "root_system": self.rs.name if self.rs else "rank0",
            "highest": [fmt_q(c) for c in self.highest] if self.highest is not None else None,
            "w0_std": self.fam.w0_std().tolist(),
        }


def _raw_builder(fam: GroupFamily, spec: RepSpec):
    """(raw rho, raw d-rho, highest weight in varpi coords or None)."""
    n = fam.n
    kind = spec.rep_kind
    if kind == "trivial" or (kind == "sym" and spec.degree == 0):
        return (lambda g: np.eye(1)), (lambda x: np.zeros((1, 1))), "zero"
    if kind == "standard":
        return (lambda g: g), (lambda x: x), "std"
    if kind in ("sym", "wedge"):
        k = spec.degree
        if k < 1 or (kind == "wedge" and k >= n):
            raise BadInput(f"unsupported degree {k} for {kind}")
        emb = sym_embedding(n, k) if kind == "sym" else wedge_embedding(n, k)
        return (
            (lambda g: emb.T @ kron_power(g, k) @ emb),
            (lambda x: emb.T @ kron_derivation(x, k) @ emb),
            (kind, k),
        )
    if kind == "adjoint":
        basis = lie_algebra_basis(fam)
        flat = np.array([b.ravel() for b in basis])

        def ad_group(g):
            gi = np.linalg.inv(g)
            return flat @ np.array([(g @ b @ gi).ravel() for b in basis]).T

        def ad_alg(x):
            return flat @ np.array([(x @ b - b @ x).ravel() for b in basis]).T

        return ad_group, ad_alg, "adjoint"
    raise BadInput(f"unsupported representation kind {kind!r}")


def _expected_highest(fam: GroupFamily, rs: RootSystemData, tag) -> Vector:
    r = rs.rank
    if tag == "zero":
        return zero(rs.ambient_dim)
    if tag == "adjoint":
        return max(rs.positive_roots, key=lambda a: (sum(rs.root_coords(a)), a))
    if fam.kind == "SL":
        if tag == "std":
            return rs.from_varpi([1] + [0] * (r - 1))
        kind, k = tag
        if kind == "sym":
            return rs.from_varpi([k] + [0] * (r - 1))
        return rs.from_varpi([int(i == k - 1) for i in range(r)])
    if tag == "std":
        return vec([1] + [0] * (r - 1))
    kind, k = tag
    if kind == "sym":
        return vec([k] + [0] * (r - 1))
    return vec([1] * min(k, r) + [0] * (r - min(k, r)))


def _round_weight(vals: Sequence[float]) -> Vector:
    out = []
    for v in vals:
        f = Q(v).limit_denominator(24)
        if abs(float(f) - v) > 1e-6:
            raise NearDegenerate(f"weight coordinate {v} is not close to a small rational")
        out.append(f)
    return tuple(out)


def realize(spec: RepSpec) -> ConcreteRep:
    """Build the matrix realization and its orthonormal weight basis."""
    fam = spec.family()
    rs = fam.root_system()
    raw, draw, tag = _raw_builder(fam, spec)
    dim = raw(np.eye(fam.n)).shape[0]
    if rs is None:
        return ConcreteRep(spec, fam, None, dim, [()] * dim, np.eye(dim), raw, [], None)
    coords = [draw(fam.cartan_coordinate(k)) for k in range(rs.ambient_dim)]
    if all(np.allclose(c, np.diag(np.diag(c)), atol=1e-12) for c in coords):
        vecs = np.eye(dim)
    else:
        rng = np.random.default_rng(12345)
        combo = sum(rng.uniform(1, 2) * c for c in coords)
        _, vecs = np.linalg.eigh((combo + combo.T) / 2)
    raw_weights = []
    for i in range(dim):
        v = vecs[:, i]
        vals = [float(v @ c @ v) for c in coords]
        for c, lam in zip(coords, vals):
            if np.linalg.norm(c @ v - lam * v) > 1e-8:
                raise NearDegenerate("Cartan action is not diagonal in the computed basis")
        w = _round_weight(vals)
        if fam.kind == "SL":
            mean = sum(w, Q(0)) / len(w)
            w = tuple(c - mean for c in w)
        raw_weights.append(w)
        j = int(np.argmax(np.abs(v)))
        if v[j] < 0:
            vecs[:, i] = -v
    order = sorted(range(dim), key=lambda i: (raw_weights[i], -i), reverse=True)
    basis = vecs[:, order]
    weights = [raw_weights[i] for i in order]
    cartan = [basis.T @ c @ basis for c in coords]
    highest = _expected_highest(fam, rs, tag)
    rep = ConcreteRep(spec, fam, rs, dim, weights, basis, raw, cartan, highest)
    if frozenset(weights) != rep.omega.weights:
        raise NearDegenerate("numerical weights differ from the exact weight set")
    return rep


def restricted_weight_diag(rep: ConcreteRep) -> dict:
    out: dict = {}
    for w in rep.weights:
        out[w] = out.get(w, 0) + 1
    return out


# ---------------------------------------------------------------------------
# criterion


@dataclass
class CriterionReport:
    v0_dim: int
    vt0_basis: np.ndarray
    moved_by_w0: bool
    witness: np.ndarray | None
    w0_matrix: np.ndarray
    residual: float
    w0_displacement: float

    @property
    def holds(self) -> bool:
        return self.moved_by_w0

    def to_json(self) -> dict:
        return {
            "criterion": self.moved_by_w0,
            "v0_dim": self.v0_dim,
            "vt0_dim": int(self.vt0_basis.shape[1]),
            "moved_by_w0": self.moved_by_w0,
            "witness": None if self.witness is None else self.witness.tolist(),
            "witness_residual": self.residual,
            "w0_displacement": self.w0_displacement,
            "w0_std": self.w0_matrix.tolist(),
        }


def l_generators(rep: ConcreteRep) -> list[np.ndarray]:
    """Matrices whose common fixed space is V^t0: exp of the Cartan basis and M generators."""
    return [expm(d) for d in rep.cartan_basis] + rep.m_generators


def vt0_basis(rep: ConcreteRep, rel_tol: float = RANK_TOL) -> np.ndarray:
    gens = l_generators(rep)
    if not gens:
        return np.eye(rep.dim_v)
    stacked = np.vstack([g - np.eye(rep.dim_v) for g in gens])
    return null_space(stacked, rel_tol)


def check_criterion(rep: ConcreteRep, rel_tol: float = RANK_TOL) -> CriterionReport:
    """Is there an L-fixed vector moved by the w0 representative?"""
    basis = vt0_basis(rep, rel_tol)
    v0_dim = sum(1 for w in rep.weights if not any(w))
    w0 = rep.w0_rep
    if basis.shape[1] == 0:
        return CriterionReport(v0_dim, basis, False, None, rep.fam.w0_std(), 0.0, 0.0)
    diff = (w0 - np.eye(rep.dim_v)) @ basis
    _, s, vt = np.linalg.svd(diff)
    top = float(s[0]) if s.size else 0.0
    moved = top > rel_tol
    witness = basis @ vt[0] if moved else None
    residual = 0.0
    if witness is not None:
        j = int(np.argmax(np.abs(witness)))
        if witness[j] < 0:
            witness = -witness
        residual = max(
            (float(np.linalg.norm(g @ witness - witness)) for g in l_generators(rep)), default=0.0
        )
    return CriterionReport(v0_dim, basis, moved, witness, rep.fam.w0_std(), residual, top)


# ---------------------------------------------------------------------------
# named fixtures


FIXTURES = {
    "so21": RepSpec("SO", p=2, q=1),
    "so32": RepSpec("SO", p=3, q=2),
    "so31": RepSpec("SO", p=3, q=1),
    "sl3s3": RepSpec("SL", n=3, rep_kind="sym", degree=3),
    "sl2adj": RepSpec("SL", n=2, rep_kind="adjoint"),
    "sl3adj": RepSpec("SL", n=3, rep_kind="adjoint"),
    "so21adj": RepSpec("SO", p=2, q=1, rep_kind="adjoint"),
    "so32adj": RepSpec("SO", p=3, q=2, rep_kind="adjoint"),
    "sl4w2": RepSpec("SL", n=4, rep_kind="wedge", degree=2),
    "sl3trivial": RepSpec("SL", n=3, rep_kind="trivial"),
    "so3": RepSpec("SOc", n=3),
}


def fixture(name: str) -> ConcreteRep:
    try:
        return realize(FIXTURES[name])
    except KeyError:
        raise BadInput(f"unknown group fixture {name!r}; known: {', '.join(sorted(FIXTURES))}") from None


def split_multiplicities(rep: ConcreteRep) -> dict | None:
    """Exact multiplicities for split fixtures (SL_n, and SO(q+1,q))."""
    if rep.rs is None or (rep.fam.kind == "SO" and rep.fam.p != rep.fam.q + 1):
        return None
    return multiplicities_split(rep.rs, rep.highest).multiplicities
