"""Floating-point dynamics of affine maps g = tau_v o rho(l) on V.

Group elements carry their standard-representation matrix ``std`` next to
the extended (d+1) x (d+1) affine matrix, so that Cartan and Jordan
projections, canonizing maps and products can all be computed from the
standard representation and pushed through ``rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction as Q
from typing import Iterable, Sequence

import numpy as np

from .concrete_rep import ConcreteRep, null_space, vt0_basis
from .errors import BadInput, NearDegenerate, NotApplicable, PropertyViolation
from .root_system import dot
from .x0_select import X0Certificate, vector_predicates

CLUSTER_TOL = 1e-6
JD_TOL = 1e-6
JD_MAX_POWER = 2**14
LEAK_TOL = 1e-6


# ---------------------------------------------------------------------------
# affine maps


@dataclass(frozen=True)
class AffineMap:
    """Extended matrix of x -> Lx + v.

    Optionally carries the standard-rep matrix of L, its inverse, and the
    extended matrix of the inverse map, so that products of many letters
    keep an accurate inverse without inverting an ill-conditioned matrix.
    """

    mat: np.ndarray
    std: np.ndarray | None = None
    std_inv: np.ndarray | None = None
    inv_mat: np.ndarray | None = None

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=float)
        d = m.shape[0] - 1
        if m.shape != (d + 1, d + 1) or d < 1:
            raise BadInput("affine matrix must be square of size at least 2")
        last = np.zeros(d + 1)
        last[-1] = 1.0
        if not np.array_equal(m[-1], last):
            raise BadInput("affine matrix last row must be (0, ..., 0, 1)")
        object.__setattr__(self, "mat", m)

    @classmethod
    def from_parts(cls, linear: np.ndarray, translation: Sequence[float], std=None, std_inv=None) -> "AffineMap":
        d = linear.shape[0]
        m = np.eye(d + 1)
        m[:d, :d] = linear
        m[:d, d] = translation
        std = None if std is None else np.asarray(std, dtype=float)
        if std is not None and std_inv is None:
            std_inv = np.linalg.inv(std)
        return cls(m, std, std_inv)

    @classmethod
    def from_group(cls, rep: ConcreteRep, std: np.ndarray, translation=None) -> "AffineMap":
        std = np.asarray(std, dtype=float)
        std_inv = group_inverse(rep, std)
        v = np.zeros(rep.dim_v) if translation is None else np.asarray(translation, dtype=float)
        lin, lin_inv = rep.rho(std), rep.rho(std_inv)
        d = rep.dim_v
        inv = np.eye(d + 1)
        inv[:d, :d] = lin_inv
        inv[:d, d] = -lin_inv @ v
        fwd = np.eye(d + 1)
        fwd[:d, :d] = lin
        fwd[:d, d] = v
        return cls(fwd, std, std_inv, inv)

    def with_translation(self, v: Sequence[float]) -> "AffineMap":
        d = self.dim
        v = np.asarray(v, dtype=float)
        fwd = self.mat.copy()
        fwd[:d, d] = v
        inv = None
        if self.inv_mat is not None:
            inv = self.inv_mat.copy()
            inv[:d, d] = -inv[:d, :d] @ v
        return AffineMap(fwd, self.std, self.std_inv, inv)

    @property
    def dim(self) -> int:
        return self.mat.shape[0] - 1

    @property
    def linear(self) -> np.ndarray:
        return self.mat[:-1, :-1]

    @property
    def translation(self) -> np.ndarray:
        return self.mat[:-1, -1]

    def __matmul__(self, other: "AffineMap") -> "AffineMap":
        def mul(a, b):
            return None if a is None or b is None else a @ b

        m = self.mat @ other.mat
        m[-1] = 0.0
        m[-1, -1] = 1.0
        inv = mul(other.inv_mat, self.inv_mat)
        if inv is not None:
            inv[-1] = 0.0
            inv[-1, -1] = 1.0
        return AffineMap(m, mul(self.std, other.std), mul(other.std_inv, self.std_inv), inv)

    def inverse(self) -> "AffineMap":
        if self.inv_mat is not None:
            return AffineMap(self.inv_mat, self.std_inv, self.std, self.mat)
        li = np.linalg.inv(self.linear)
        d = self.dim
        inv = np.eye(d + 1)
        inv[:d, :d] = li
        inv[:d, d] = -li @ self.translation
        return AffineMap(inv, self.std_inv, self.std, self.mat)

    def power(self, n: int) -> "AffineMap":
        if n < 0:
            return self.inverse().power(-n)
        d = self.dim
        std_id = None if self.std is None else np.eye(self.std.shape[0])
        out = AffineMap(np.eye(d + 1), std_id, std_id, None if self.inv_mat is None else np.eye(d + 1))
        base = self
        while n:
            if n & 1:
                out = out @ base
            base = base @ base
            n >>= 1
        return out

    def __call__(self, x: Sequence[float]) -> np.ndarray:
        return self.linear @ np.asarray(x, dtype=float) + self.translation


def group_inverse(rep: ConcreteRep, std: np.ndarray) -> np.ndarray:
    """Inverse in the standard representation; exact transpose formula for orthogonal groups."""
    if rep.fam.kind in ("SO", "SOc"):
        j = rep.fam.form
        return j @ std.T @ j
    return np.linalg.inv(std)


def orth(mat: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the column space."""
    if mat.size == 0 or mat.shape[1] == 0:
        return np.zeros((mat.shape[0], 0))
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > rel_tol * s[0])) if s[0] > 0 else 0
    return u[:, :rank]


def subspace_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Largest principal angle distance: norm of the difference of orthoprojectors."""
    qa, qb = orth(a), orth(b)
    if qa.shape[1] != qb.shape[1]:
        return 1.0
    return float(np.linalg.norm(qa @ qa.T - qb @ qb.T, 2))


def restricted_norm(mat: np.ndarray, basis: np.ndarray) -> float:
    q = orth(basis)
    if q.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(mat @ q, 2))


# ---------------------------------------------------------------------------
# proximality


@dataclass(frozen=True)
class ProximalReport:
    is_proximal: bool
    r: float
    gap: float
    es: np.ndarray | None
    eu: np.ndarray | None
    s_tilde: float | None


def proximal_report(mat: np.ndarray, tol: float = CLUSTER_TOL) -> ProximalReport:
    mat = np.asarray(mat, dtype=float)
    vals, vecs = np.linalg.eig(mat)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    r = float(abs(vals[0]))
    gap = r / float(abs(vals[1])) if vals.size > 1 and abs(vals[1]) > 0 else math.inf
    top_real = abs(vals[0].imag) <= tol * max(r, 1e-300)
    if not top_real:
        return ProximalReport(False, r, gap, None, None, None)
    if abs(gap - 1) <= tol:
        raise NearDegenerate("indeterminate proximality: spectral gap within tolerance of 1")
    if gap < 1 + tol:
        return ProximalReport(False, r, gap, None, None, None)
    es = np.real(vecs[:, 0])
    es = es / np.linalg.norm(es)
    lvals, lvecs = np.linalg.eig(mat.T)
    k = int(np.argmin(np.abs(lvals - vals[0])))
    normal = np.real(lvecs[:, k])
    normal = normal / np.linalg.norm(normal)
    hyper = null_space(normal[None, :])
    s_tilde = float(np.linalg.norm(mat @ hyper, 2)) / r
    return ProximalReport(True, r, gap, es, normal, s_tilde)


def line_angle(u: np.ndarray, v: np.ndarray) -> float:
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return float(np.linalg.norm(v - (u @ v) * u))


@dataclass
class ProximalStats:
    trials: int
    non_proximal: int
    angle_ratio: list = field(default_factory=list)
    strength_ratio: list = field(default_factory=list)
    radius_ratio: list = field(default_factory=list)

    def summary(self) -> dict:
        def mm(xs):
            return {"max": float(np.max(xs)), "median": float(np.median(xs))} if xs else None

        return {
            "trials": self.trials,
            "non_proximal": self.non_proximal,
            "angle_over_s1": mm(self.angle_ratio),
            "s12_over_s1s2": mm(self.strength_ratio),
            "r12_over_norms": mm(self.radius_ratio),
        }


def proximal_product_experiment(pairs: Iterable[tuple[np.ndarray, np.ndarray]]) -> ProximalStats:
    """Ratios controlling the product of two proximal maps."""
    stats = ProximalStats(0, 0)
    for g1, g2 in pairs:
        stats.trials += 1
        p1, p2 = proximal_report(g1), proximal_report(g2)
        try:
            p12 = proximal_report(g1 @ g2)
        except NearDegenerate:
            stats.non_proximal += 1
            continue
        if not (p1.is_proximal and p2.is_proximal and p12.is_proximal):
            stats.non_proximal += 1
            continue
        ang = line_angle(p12.es, p1.es)
        stats.angle_ratio.append(ang / p1.s_tilde if p1.s_tilde > 0 else (0.0 if ang < 1e-12 else math.inf))
        denom = p1.s_tilde * p2.s_tilde
        stats.strength_ratio.append(p12.s_tilde / denom if denom > 0 else 0.0)
        stats.radius_ratio.append(p12.r / (np.linalg.norm(g1, 2) * np.linalg.norm(g2, 2)))
    return stats


# ---------------------------------------------------------------------------
# Cartan and Jordan projections


def _varpi_system(rep: ConcreteRep) -> tuple[np.ndarray, np.ndarray]:
    rs = rep.rs
    if rs is None:
        raise NotApplicable("rank 0 group: the Cartan subspace is trivial")
    f = np.array([[float(c) for c in w] for w in rs.fundamental_weights])
    comp = np.array([[float(c) for c in v] for v in rs.span_complement()]).reshape(-1, rs.ambient_dim)
    return f, comp


def _solve_varpi(rep: ConcreteRep, vals: Sequence[float]) -> np.ndarray:
    f, comp = _varpi_system(rep)
    a = np.vstack([f, comp])
    b = np.concatenate([np.asarray(vals, dtype=float), np.zeros(comp.shape[0])])
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    return x


def varpi_values(rep: ConcreteRep, x: Sequence[float]) -> np.ndarray:
    f, _ = _varpi_system(rep)
    return f @ np.asarray(x, dtype=float)


def cartan_projection(rep: ConcreteRep, std: np.ndarray) -> np.ndarray:
    """Ct(g) from the norms of the fundamental-type representations."""
    reps = rep.fundamental_type_reps()
    if not reps:
        raise NotApplicable("no fundamental-type representations for this family")
    vals = [math.log(np.linalg.norm(fn(std), 2)) / n for fn, n in reps]
    return _solve_varpi(rep, vals)


def cartan_projection_svd(rep: ConcreteRep, std: np.ndarray) -> np.ndarray:
    """Ct(g) from the singular values of the standard representation (cross-check)."""
    s = np.log(np.linalg.svd(std, compute_uv=False))
    if rep.fam.kind == "SL":
        return s - s.mean()
    return s[: rep.fam.q]


def _log_norm_powers(mat: np.ndarray, kmax: int) -> list[float]:
    """log ||mat^(2^k)|| for k = 0..kmax by normalized repeated squaring."""
    nrm = np.linalg.norm(mat, 2)
    cur = mat / nrm
    logs = [math.log(nrm)]
    for _ in range(kmax):
        cur = cur @ cur
        nrm = np.linalg.norm(cur, 2)
        if nrm == 0:
            raise NearDegenerate("nilpotent fundamental representation")
        logs.append(2 * logs[-1] + math.log(nrm))
        cur = cur / nrm
    return logs


@dataclass(frozen=True)
class JordanEstimate:
    value: np.ndarray
    power: int
    converged: bool
    spread: float
    eig_value: np.ndarray | None


def jordan_projection_eig(rep: ConcreteRep, std: np.ndarray, std_inv: np.ndarray | None = None) -> np.ndarray:
    """Jd(g) from the sorted eigenvalue moduli of the standard representation."""
    s, _, _ = _spectrum(std, group_inverse(rep, std) if std_inv is None else std_inv)
    if rep.fam.kind == "SL":
        return s - s.mean()
    if rep.fam.kind == "SO":
        return s[: rep.fam.q]
    raise NotApplicable("rank 0 group")


def jordan_projection(rep: ConcreteRep, std: np.ndarray, tol: float = JD_TOL, max_power: int = JD_MAX_POWER) -> JordanEstimate:
    """Gelfand-limit estimate of Jd(g), with the eigenvalue route as a cross-check.

    Uses the differenced quotient (log||A^(2N)|| - log||A^N||) / N, which
    cancels the constant term of log||A^N||.  N always doubles up to
    ``max_power``: when two eigenvalue moduli nearly coincide, successive
    estimates can agree long before they reach the limit.  ``converged``
    reports whether the last two estimates differ by less than ``tol``.
    """
    reps = rep.fundamental_type_reps()
    if not reps:
        raise NotApplicable("no fundamental-type representations for this family")
    kmax = int(math.log2(max_power))
    series = [_log_norm_powers(fn(std), kmax + 1) for fn, _ in reps]
    ns = [n for _, n in reps]
    ests = [np.array([(s[k + 1] - s[k]) / 2**k / m for s, m in zip(series, ns)]) for k in range(kmax + 1)]
    est = ests[-1]
    spread = float(np.max(np.abs(ests[-1] - ests[-2]))) if kmax else math.inf
    converged = spread < tol
    power = 2**kmax
    try:
        eig = jordan_projection_eig(rep, std)
    except NotApplicable:
        eig = None
    return JordanEstimate(_solve_varpi(rep, est), power, converged, spread, eig)


def linear_contraction_strength(rep: ConcreteRep, cert: X0Certificate, std: np.ndarray) -> float:
    """exp(-min alpha(Ct(g))) over simple roots alpha outside Pi_{X0}."""
    ct = cartan_projection(rep, std)
    vals = [
        float(np.dot([float(c) for c in a], ct))
        for i, a in enumerate(cert.rs.simple_roots)
        if i not in cert.pi_x0
    ]
    return math.exp(-min(vals)) if vals else 1.0


# ---------------------------------------------------------------------------
# canonizing maps


def _spectrum(std: np.ndarray, std_inv: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues sorted by decreasing modulus, with the lower half read off the inverse.

    Returns (log moduli, eigenvalues, eigenvectors as columns).
    """
    n = std.shape[0]
    vals, vecs = np.linalg.eig(std)
    order = np.argsort(-np.abs(vals), kind="stable")
    ivals, ivecs = np.linalg.eig(std_inv)
    iorder = np.argsort(-np.abs(ivals), kind="stable")
    out_vals = np.empty(n, dtype=complex)
    out_vecs = np.empty((n, n), dtype=complex)
    for pos in range(n):
        if pos < (n + 1) // 2:
            out_vals[pos] = vals[order[pos]]
            out_vecs[:, pos] = vecs[:, order[pos]]
        else:
            k = iorder[n - 1 - pos]
            out_vals[pos] = 1 / ivals[k]
            out_vecs[:, pos] = ivecs[:, k]
    logs = np.array([math.log(abs(v)) if v != 0 else -math.inf for v in out_vals])
    return logs, out_vals, out_vecs


def _clusters(logs: np.ndarray, tol: float) -> list[list[int]]:
    """Group consecutive positions whose log moduli agree within tol."""
    groups: list[list[int]] = []
    for i, x in enumerate(logs):
        if groups and abs(logs[groups[-1][-1]] - x) <= tol * max(1.0, abs(x)):
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _real_eigvec(vecs: np.ndarray, i: int) -> np.ndarray:
    v = vecs[:, i]
    k = int(np.argmax(np.abs(v)))
    v = v / (v[k] / abs(v[k]))
    v = np.real(v)
    return v / np.linalg.norm(v)


def canonize_std(
    rep: ConcreteRep, std: np.ndarray, tol_cluster: float = CLUSTER_TOL, std_inv: np.ndarray | None = None
) -> np.ndarray:
    """h in G with h g h^-1 = exp(Jd(g)) m, m in M (standard representation).

    Supported when the nonzero part of Jd(g) has distinct coordinates.
    """
    std = np.asarray(std, dtype=float)
    if std_inv is None:
        std_inv = group_inverse(rep, std)
    logs, vals, vecs = _spectrum(std, std_inv)
    groups = _clusters(logs, tol_cluster)
    fam = rep.fam
    n = fam.n
    if fam.kind == "SL":
        if any(len(g) > 1 for g in groups):
            raise NearDegenerate("eigenvalue moduli of the standard representation are not distinct")
        if np.any(np.abs(vals.imag) > tol_cluster * np.abs(vals)):
            raise NearDegenerate("complex eigenvalue in a simple cluster")
        p = np.column_stack([_real_eigvec(vecs, i) for i in range(n)])
        if np.linalg.det(p) < 0:
            p[:, 0] *= -1
        p = p / abs(np.linalg.det(p)) ** (1.0 / n)
        return np.linalg.inv(p)
    if fam.kind != "SO":
        raise NotApplicable("canonical form needs a noncompact group")
    p, q = fam.p, fam.q
    j = fam.form
    if any(len(g) > 1 for g in groups[:q]) or any(len(g) > 1 for g in groups[len(groups) - q :]):
        raise NearDegenerate("eigenvalue clusters do not match the weight pattern of the standard representation")
    if len(groups) != 2 * q + 1 or len(groups[q]) != p - q:
        raise NearDegenerate("neutral cluster has the wrong dimension")
    if not all(logs[i] > tol_cluster for i in range(q)):
        raise NearDegenerate("a Jordan coordinate is within tolerance of zero")
    b = np.zeros((n, n))
    pairs = []
    for idx in range(q):
        u = _real_eigvec(vecs, idx)
        up = _real_eigvec(vecs, n - 1 - idx)
        up = up / (u @ j @ up)
        pairs += [u, up]
        b[:, idx] = (u + up) / math.sqrt(2)
        b[:, p + idx] = (u - up) / math.sqrt(2)
    n0 = null_space(np.array(pairs) @ j, 1e-10)
    if n0.shape[1] != p - q:
        raise NearDegenerate("neutral space has the wrong dimension")
    gram = n0.T @ j @ n0
    ev, evec = np.linalg.eigh((gram + gram.T) / 2)
    if np.min(ev) <= 0:
        raise NearDegenerate("neutral space is not positive for the form")
    n0 = n0 @ evec @ np.diag(ev**-0.5) @ evec.T
    b[:, q:p] = n0
    if np.linalg.det(b[p:, p:]) < 0:
        b[:, [0, p]] *= -1
    if np.linalg.det(b[:p, :p]) < 0:
        b[:, q] *= -1
    return j @ b.T @ j


def centralizer_mask(fam) -> np.ndarray:
    """Entries allowed in a standard-rep matrix commuting with the Cartan subspace."""
    n = fam.n
    if fam.kind == "SL":
        return np.eye(n, dtype=bool)
    mask = np.zeros((n, n), dtype=bool)
    p, q = fam.p, fam.q
    for i in range(q):
        for a in (i, p + i):
            for b_ in (i, p + i):
                mask[a, b_] = True
    mask[q:p, q:p] = True
    return mask


def canonical_residual(rep: ConcreteRep, std: np.ndarray, h: np.ndarray) -> float:
    """How far h g h^-1 is from commuting with the Cartan subspace (0 in canonical form)."""
    c = h @ std @ np.linalg.inv(h)
    scale = max(1.0, np.linalg.norm(c, 2))
    res = 0.0
    for k in range(rep.fam.ambient_dim):
        a = rep.fam.cartan_coordinate(k)
        res = max(res, float(np.linalg.norm(c @ a - a @ c, 2)) / scale)
    return res


# ---------------------------------------------------------------------------
# ideal dynamical spaces


def reference_indices(rep: ConcreteRep, cert: X0Certificate) -> dict:
    out = {"gt": [], "eq": [], "lt": []}
    for i, w in enumerate(rep.weights):
        v = dot(w, cert.x0)
        out["gt" if v > 0 else "lt" if v < 0 else "eq"].append(i)
    return out


@dataclass
class DynamicalSplit:
    phi: AffineMap
    h: np.ndarray
    shift: np.ndarray
    jd: JordanEstimate
    v_gg: np.ndarray
    v_ll: np.ndarray
    v_approx: np.ndarray
    a_gtr: np.ndarray
    a_lesssim: np.ndarray
    a_approx: np.ndarray
    basepoint: np.ndarray
    canonical: AffineMap
    leakage: float
    idx: dict


def ideal_split(
    rep: ConcreteRep, cert: X0Certificate, g: AffineMap, tol_cluster: float = CLUSTER_TOL, tol_leak: float = LEAK_TOL
) -> DynamicalSplit:
    """Canonizing map of g and the ideal dynamical spaces it determines."""
    if g.std is None:
        raise BadInput("element needs its standard-representation matrix")
    jd = jordan_projection(rep, g.std)
    preds = vector_predicates(cert, [float(c) for c in jd.value], tol=1e-7)
    if not preds.rho_regular:
        raise NotApplicable("element is not rho-regular")
    h = canonize_std(rep, g.std, tol_cluster, g.std_inv)
    hi = np.linalg.inv(h)
    r = rep.rho(h)
    ri = rep.rho(hi)
    c = h @ g.std @ hi
    mask = centralizer_mask(rep.fam)
    c_clean = np.where(mask, c, 0.0)
    leak = float(np.linalg.norm(c - c_clean, 2) / np.linalg.norm(c, 2))
    if leak > tol_leak:
        raise NearDegenerate(f"ideal spaces are not invariant (leakage {leak:.3g})")
    lp = rep.rho(c_clean)
    idx = reference_indices(rep, cert)
    ne = idx["gt"] + idx["lt"]
    d = rep.dim_v
    rv = r @ g.translation
    w = np.zeros(d)
    if ne:
        block = lp[np.ix_(ne, ne)] - np.eye(len(ne))
        w[ne] = np.linalg.solve(block, rv[ne])
    fwd = np.eye(d + 1)
    fwd[:d, :d] = r
    fwd[:d, d] = w
    inv = np.eye(d + 1)
    inv[:d, :d] = ri
    inv[:d, d] = -ri @ w
    phi = AffineMap(fwd, h, hi, inv)
    t = rv + w - lp @ w
    t[ne] = 0.0
    c_inv_clean = np.where(mask, h @ g.std_inv @ hi, 0.0)
    lp_inv = rep.rho(c_inv_clean)
    cinv = np.eye(d + 1)
    cinv[:d, :d] = lp_inv
    cinv[:d, d] = -lp_inv @ t
    cfwd = np.eye(d + 1)
    cfwd[:d, :d] = lp
    cfwd[:d, d] = t
    canonical = AffineMap(cfwd, c_clean, c_inv_clean, cinv)
    pinv = inv
    e = np.eye(d + 1)
    ge = idx["gt"] + idx["eq"]
    le = idx["lt"] + idx["eq"]
    v_gg = orth(ri[:, idx["gt"]])
    v_ll = orth(ri[:, idx["lt"]])
    v_approx = orth(ri[:, idx["eq"]])
    a_gtr = orth(pinv @ e[:, ge + [d]])
    a_lesssim = orth(pinv @ e[:, le + [d]])
    a_approx = orth(pinv @ e[:, idx["eq"] + [d]])
    ecols = ri[:, idx["eq"]]
    if ecols.shape[1]:
        y, *_ = np.linalg.lstsq(ecols, ri @ w, rcond=None)
        base = ecols @ y - ri @ w
    else:
        base = -ri @ w
    return DynamicalSplit(phi, h, w, jd, v_gg, v_ll, v_approx, a_gtr, a_lesssim, a_approx, base, canonical, leak, idx)


def _restricted_in_frame(frame_inv: np.ndarray, op: np.ndarray, cols: list[int]) -> float:
    """Norm of frame_inv . op . frame restricted to frame_inv(span of coordinate cols)."""
    if not cols:
        return 0.0
    b = frame_inv[:, cols]
    qm, rm = np.linalg.qr(b)
    return float(np.linalg.norm(frame_inv @ op[:, cols] @ np.linalg.inv(rm), 2))


def affine_contraction_strength(split: DynamicalSplit, g: AffineMap | None = None) -> float:
    """||g restricted to V^<<_g|| times ||g^-1 restricted to A^>~_g||.

    Evaluated in canonical coordinates, where both restrictions are block
    matrices, so that errors in the computed subspaces are not amplified by g^-1.
    """
    d = split.canonical.dim
    idx = split.idx
    fwd = _restricted_in_frame(split.phi.inv_mat[:d, :d], split.canonical.linear, idx["lt"])
    bwd = _restricted_in_frame(split.phi.inv_mat, split.canonical.inv_mat, idx["gt"] + idx["eq"] + [d])
    return fwd * bwd


# ---------------------------------------------------------------------------
# Margulis invariant


@dataclass(frozen=True)
class MargulisResult:
    m: np.ndarray
    coords: np.ndarray
    x_dependence: float
    formula_gap: float


def projector_t(rep: ConcreteRep, basis: np.ndarray | None = None) -> np.ndarray:
    b = vt0_basis(rep) if basis is None else basis
    return b @ b.T


def margulis_invariant(
    rep: ConcreteRep, split: DynamicalSplit, g: AffineMap, vt0: np.ndarray | None = None, seed: int = 0
) -> MargulisResult:
    """pi_t(phi_lin (g(x) - x)) at the basepoint of A^~_g, checked at a second point."""
    b = vt0_basis(rep) if vt0 is None else vt0
    pt = b @ b.T
    r = split.phi.linear
    x = split.basepoint
    m = pt @ (r @ (g(x) - x))
    rng = np.random.default_rng(seed)
    if split.v_approx.shape[1]:
        x2 = x + split.v_approx @ rng.standard_normal(split.v_approx.shape[1])
    else:
        x2 = x
    m2 = pt @ (r @ (g(x2) - x2))
    scale = max(1.0, np.linalg.norm(r, 2) * np.linalg.norm(g.linear, 2) * (1 + np.linalg.norm(x2)))
    dep = float(np.linalg.norm(m - m2))
    if dep > 1e-8 * scale:
        raise PropertyViolation(f"quasi-translation violation: M depends on the point ({dep:.3g})")
    simple = pt @ (r @ g.translation)
    return MargulisResult(m, b.T @ m, dep, float(np.linalg.norm(simple - m)))


def margulis_classical_so21(rep: ConcreteRep, g: AffineMap) -> float:
    """|B(g(x) - x, u0)| for SO(2,1): the classical Margulis invariant up to sign."""
    if rep.name != "SO(2,1):standard":
        raise NotApplicable("classical Margulis invariant is only implemented for SO(2,1) standard")
    j = rep.fam.form
    lin_std = g.std
    u0 = null_space(lin_std - np.eye(3), 1e-9)[:, 0]
    u0 = u0 / math.sqrt(u0 @ j @ u0)
    # translation lives in the weight basis; move it back to standard coordinates
    v_std = rep.basis @ g.translation
    return abs(float(v_std @ j @ u0))


# ---------------------------------------------------------------------------
# non-degeneracy


def nondegeneracy_bound(a_ge: np.ndarray, a_le: np.ndarray, idx: dict, tol: float = 1e-9) -> float:
    """max(||phi||, ||phi^-1||) for an explicit phi sending the pair to the reference pair.

    This is an upper bound for the optimal constant, not the optimum.
    """
    d1 = a_ge.shape[0]
    d = d1 - 1
    q1, q2 = orth(a_ge), orth(a_le)
    ne, ng, nl = len(idx["eq"]), len(idx["gt"]), len(idx["lt"])
    if q1.shape[1] != ng + ne + 1 or q2.shape[1] != nl + ne + 1:
        raise BadInput("subspace dimensions do not match the reference pair")
    inter = null_space(np.hstack([q1, -q2]), tol)
    i_basis = orth(q1 @ inter[: q1.shape[1]])
    if i_basis.shape[1] != ne + 1:
        raise PropertyViolation("degenerate pair: intersection has the wrong dimension")
    last = i_basis[-1]
    if np.linalg.norm(last) <= tol:
        raise PropertyViolation("degenerate pair: neutral space is contained in V")
    coeff = last / (last @ last)
    affine_vec = i_basis @ coeff
    i_lin = orth(i_basis @ null_space(last[None, :], tol)) if ne else np.zeros((d1, 0))

    def lin_part(q):
        return orth(q @ null_space(q[-1][None, :], tol))

    v1, v2 = lin_part(q1), lin_part(q2)
    f1 = orth(v1 - i_lin @ (i_lin.T @ v1))[:, :ng] if ng else np.zeros((d1, 0))
    f2 = orth(v2 - i_lin @ (i_lin.T @ v2))[:, :nl] if nl else np.zeros((d1, 0))
    phi_inv = np.zeros((d1, d1))
    phi_inv[:, idx["gt"]] = f1
    phi_inv[:, idx["eq"]] = i_lin
    phi_inv[:, idx["lt"]] = f2
    phi_inv[:, d] = affine_vec
    if np.linalg.matrix_rank(phi_inv) < d1:
        raise PropertyViolation("degenerate pair: spaces are not transverse")
    phi = np.linalg.inv(phi_inv)
    return float(max(np.linalg.norm(phi, 2), np.linalg.norm(phi_inv, 2)))


# ---------------------------------------------------------------------------
# per-element report


@dataclass
class MargulisData:
    jd: np.ndarray
    ct: np.ndarray
    m: np.ndarray
    m_coords: np.ndarray
    s_x0_fwd: float
    s_x0_bwd: float
    nondeg_bound: float
    rho_regular: bool
    jd_converged: bool
    jd_eig: np.ndarray | None
    split: DynamicalSplit = field(repr=False)

    def to_json(self) -> dict:
        return {
            "jd": self.jd.tolist(),
            "jd_eig": None if self.jd_eig is None else self.jd_eig.tolist(),
            "jd_converged": self.jd_converged,
            "ct": self.ct.tolist(),
            "margulis": self.m_coords.tolist(),
            "s_x0_fwd": self.s_x0_fwd,
            "s_x0_bwd": self.s_x0_bwd,
            "nondeg_bound": self.nondeg_bound,
            "rho_regular": self.rho_regular,
        }


def margulis_data(rep: ConcreteRep, cert: X0Certificate, g: AffineMap, vt0: np.ndarray | None = None) -> MargulisData:
    split = ideal_split(rep, cert, g)
    inv = g.inverse()
    split_inv = ideal_split(rep, cert, inv)
    mres = margulis_invariant(rep, split, g, vt0)
    nd = nondegeneracy_bound(split.a_gtr, split.a_lesssim, split.idx)
    return MargulisData(
        jd=split.jd.value,
        ct=cartan_projection(rep, g.std),
        m=mres.m,
        m_coords=mres.coords,
        s_x0_fwd=affine_contraction_strength(split, g),
        s_x0_bwd=affine_contraction_strength(split_inv, inv),
        nondeg_bound=nd,
        rho_regular=True,
        jd_converged=split.jd.converged,
        jd_eig=split.jd.eig_value,
        split=split,
    )


# ---------------------------------------------------------------------------
# random elements


def random_dominant(rep: ConcreteRep, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    fam = rep.fam
    if fam.kind == "SL":
        x = np.sort(rng.standard_normal(fam.n))[::-1] * scale
        return x - x.mean()
    if fam.kind == "SO":
        return np.sort(np.abs(rng.standard_normal(fam.q)))[::-1] * scale
    raise NotApplicable("rank 0 group")


def random_group_element(rep: ConcreteRep, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    fam = rep.fam
    return fam.random_k(rng) @ fam.exp_cartan(random_dominant(rep, rng, scale)) @ fam.random_k(rng)


def random_affine(rep: ConcreteRep, rng: np.random.Generator, scale: float = 1.0, tscale: float = 1.0) -> AffineMap:
    std = random_group_element(rep, rng, scale)
    return AffineMap.from_group(rep, std, tscale * rng.standard_normal(rep.dim_v))


def random_rho_regular(
    rep: ConcreteRep, cert: X0Certificate, rng: np.random.Generator, scale: float = 1.0, max_tries: int = 200
) -> AffineMap:
    """Random element whose inverse and itself both admit an ideal split."""
    for _ in range(max_tries):
        g = random_affine(rep, rng, scale)
        try:
            jd = jordan_projection(rep, g.std)
            if not vector_predicates(cert, [float(c) for c in jd.value], tol=1e-3).rho_regular:
                continue
            ideal_split(rep, cert, g)
            ideal_split(rep, cert, g.inverse())
        except (NearDegenerate, NotApplicable):
            continue
        return g
    raise NearDegenerate("could not sample a rho-regular element")


# ---------------------------------------------------------------------------
# additivity experiment


@dataclass
class AdditivityRow:
    trial: int
    power: int
    dev_m: float
    norm_m_g: float
    norm_m_h: float
    trapezoid_max: float
    product_regular: bool


def trapezoid_slack(rep: ConcreteRep, g_std: np.ndarray, h_std: np.ndarray) -> np.ndarray:
    """varpi_i(Jd(gh) - Ct(g) - Ct(h)) for every i."""
    jd = jordan_projection(rep, g_std @ h_std).value
    return varpi_values(rep, jd - cartan_projection(rep, g_std) - cartan_projection(rep, h_std))


def additivity_experiment(
    rep: ConcreteRep,
    cert: X0Certificate,
    pairs: Sequence[tuple[AffineMap, AffineMap]],
    powers: Sequence[int] = (4, 8, 16),
) -> list[AdditivityRow]:
    vt0 = vt0_basis(rep)
    rows = []
    for t, (g, h) in enumerate(pairs):
        for n in powers:
            gn, hn = g.power(n), h.power(n)
            slack = float(np.max(trapezoid_slack(rep, gn.std, hn.std)))
            try:
                mg = margulis_invariant(rep, ideal_split(rep, cert, gn), gn, vt0).m
                mh = margulis_invariant(rep, ideal_split(rep, cert, hn), hn, vt0).m
                prod = gn @ hn
                mgh = margulis_invariant(rep, ideal_split(rep, cert, prod), prod, vt0).m
            except (NotApplicable, NearDegenerate):
                rows.append(AdditivityRow(t, n, math.nan, math.nan, math.nan, slack, False))
                continue
            rows.append(
                AdditivityRow(
                    t,
                    n,
                    float(np.linalg.norm(mgh - mg - mh)),
                    float(np.linalg.norm(mg)),
                    float(np.linalg.norm(mh)),
                    slack,
                    True,
                )
            )
    return rows
