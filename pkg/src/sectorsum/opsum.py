"""Inverting A + B by a contour integral, and the pairing that bounds it.

For a commuting sectorial pair with angle sum below pi the inverse of
A + B is the contour integral of (lam + B)^{-1} R(lam, A) over a sector
boundary between the two spectra.  The operator A(A+B)^{-1} additionally
splits, ray by ray, into a pairing of half-line square functions; that
split is what produces explicit closedness constants.
"""
from __future__ import annotations

import cmath
import dataclasses
import math

import numpy as np
import scipy.linalg as sla

from ._util import substream
from .contour import (ContourQuadrature, SpectralSymbolGrid, fractional_power,
                      phi_symbol, psi_symbol, sector_quadrature,
                      halfline_quadrature, _stride2_defect)
from .core import LinearOperator, MixedNormSpec, as_operator, mixed_norm
from .errors import (ContourTooTight, IncompatibleSpec, NotConverged,
                     SingularBase, SingularSum)

COMMUTE_TOL = 1e-10


@dataclasses.dataclass(eq=False)
class OperatorSumProblem:
    """A commuting pair (A, B) with a contour angle and an ambient norm.

    rho defaults to the midpoint of the admissible interval between the
    working angle of A and pi minus the working angle of B.  The pair must
    commute: everything downstream manipulates resolvents of A and B as if
    they commuted, and silently wrong answers would follow otherwise.
    """
    A: LinearOperator
    B: LinearOperator
    rho: float | None = None
    quad: ContourQuadrature | None = None
    norm: MixedNormSpec = dataclasses.field(
        default_factory=lambda: MixedNormSpec.p_norm(2))
    label: str = ""

    def __post_init__(self):
        self.A = as_operator(self.A)
        self.B = as_operator(self.B)
        if self.A.dim != self.B.dim:
            raise IncompatibleSpec("A and B act on different spaces")
        comm = self.A.entries @ self.B.entries - self.B.entries @ self.A.entries
        scale = (np.linalg.norm(self.A.entries) *
                 np.linalg.norm(self.B.entries))
        if scale > 0 and np.linalg.norm(comm) > COMMUTE_TOL * scale:
            raise IncompatibleSpec(
                f"pair does not commute: relative defect "
                f"{np.linalg.norm(comm) / scale:.2e}")
        self.norm.check_dim(self.A.dim)
        ang_a = self.A.spectral_angle()
        ang_b = self.B.spectral_angle()
        if ang_a + ang_b >= math.pi:
            raise ContourTooTight(
                f"spectral angles {ang_a:.4g} + {ang_b:.4g} >= pi")
        if self.rho is None:
            wa, wb = self.A.working_angle(), self.B.working_angle()
            if wa + wb >= math.pi:  # fall back to the measured angles
                wa, wb = ang_a, ang_b
            self.rho = 0.5 * (wa + (math.pi - wb))
        if not (ang_a < self.rho < math.pi - ang_b):
            raise ContourTooTight(
                f"rho={self.rho:.4g} outside ({ang_a:.4g}, {math.pi - ang_b:.4g})")
        if not self.label:
            self.label = f"{self.A.label or 'A'}+{self.B.label or 'B'}"
        self._cache = {}

    @property
    def dim(self) -> int:
        return self.A.dim

    def margin(self) -> float:
        """Angular distance from the contour to both working sectors."""
        m = min(self.rho - self.A.working_angle(),
                (math.pi - self.rho) - self.B.working_angle())
        if m <= 0:  # claimed angles leave no room; use measured ones
            m = min(self.rho - self.A.spectral_angle(),
                    (math.pi - self.rho) - self.B.spectral_angle())
        return m

    def scales(self):
        mags = np.concatenate([np.abs(self.A.spectrum()),
                               np.abs(self.B.spectrum())])
        if np.any(mags == 0.0):
            raise SingularBase("0 is an eigenvalue; the sum inverse integral "
                               "needs invertible factors")
        return float(mags.min()), float(mags.max())

    def auto_quad(self, tol: float, decay_zero: float = 1.0,
                  decay_inf: float = 1.0) -> ContourQuadrature:
        lo, hi = self.scales()
        return sector_quadrature(self.rho, tol=tol, decay_zero=decay_zero,
                                 decay_inf=decay_inf, margin=self.margin(),
                                 scale_lo=lo, scale_hi=hi)


@dataclasses.dataclass
class SumInverseResult:
    S: LinearOperator
    residual: float
    defect: float
    quad: ContourQuadrature


def build_sum_inverse(prob: OperatorSumProblem, tol: float = 1e-9,
                      quad: ContourQuadrature | None = None,
                      check: bool = True) -> SumInverseResult:
    """Contour quadrature of (2 pi i)^{-1} Int (lam+B)^{-1} R(lam,A) d lam.

    Returns the assembled inverse together with the residual
    ||(A+B) S - I||_2 and the stride-2 quadrature defect.
    """
    if quad is None:
        quad = prob.quad or prob.auto_quad(tol)
    rho = float(quad.rho)
    A, B = prob.A, prob.B
    ang_a, ang_b = A.spectral_angle(), B.spectral_angle()
    if not (ang_a < rho < math.pi - ang_b):
        raise ContourTooTight(
            f"contour angle {rho:.4g} outside ({ang_a:.4g}, {math.pi - ang_b:.4g})")
    Id = np.eye(prob.dim)
    total = np.zeros((prob.dim, prob.dim), dtype=np.complex128)
    coarse = np.zeros_like(total)
    ts, ws = quad.t_grid(), quad.weights()
    n = quad.node_count
    for j, (t, w) in enumerate(zip(ts, ws)):
        term = np.zeros_like(total)
        for sign in (1.0, -1.0):
            lam = t * cmath.exp(1j * sign * rho)
            R = sla.lu_solve(sla.lu_factor(lam * Id - A.entries), Id)
            M = sla.lu_solve(sla.lu_factor(lam * Id + B.entries), R)
            term -= sign * cmath.exp(1j * sign * rho) * t * M
        total += w * term
        if j % 2 == 0:
            wc = quad.step * (1.0 if 0 < j < n - 1 else 0.5) * 2.0
            coarse += wc * term
    total /= 2j * np.pi
    coarse /= 2j * np.pi
    defect = _stride2_defect(total, coarse)
    if check and defect > max(20.0 * math.sqrt(tol), 200.0 * tol):
        raise NotConverged(f"sum-inverse stride-2 defect {defect:.3g}")
    residual = float(np.linalg.norm(
        (A.entries + B.entries) @ total - Id, 2))
    return SumInverseResult(
        S=LinearOperator(total, label=f"({prob.label})^-1"),
        residual=residual, defect=defect, quad=quad)


def dense_sum_inverse(prob: OperatorSumProblem) -> np.ndarray:
    """Direct LU inverse of A + B; the oracle the contour route must match."""
    M = prob.A.entries + prob.B.entries
    sv = sla.svdvals(M)
    if sv[-1] == 0 or sv[0] / sv[-1] > 1e14:
        raise SingularSum("A + B is numerically singular")
    return sla.lu_solve(sla.lu_factor(M), np.eye(prob.dim))


def apply_AS(prob: OperatorSumProblem, x: np.ndarray, tol: float = 1e-9,
             quad: ContourQuadrature | None = None,
             check: bool = True) -> np.ndarray:
    """A S x straight from the contour representation.

    The integrand lam^{1/2} (lam+B)^{-1} A^{1/2} R(lam,A) x decays like
    t^{3/2} at 0 and t^{-1/2} at infinity in the dt/t variable, so the
    automatic range is wider on the right than for the plain inverse.
    """
    if quad is None:
        quad = prob.auto_quad(tol, decay_zero=1.5, decay_inf=0.5)
    rho = float(quad.rho)
    x = np.asarray(x, dtype=np.complex128)
    key = "half_power"
    if key not in prob._cache:
        prob._cache[key] = fractional_power(prob.A, 0.5).entries
    Ah = prob._cache[key]
    A, B = prob.A, prob.B
    Id = np.eye(prob.dim)
    total = np.zeros(prob.dim, dtype=np.complex128)
    coarse = np.zeros_like(total)
    ts, ws = quad.t_grid(), quad.weights()
    n = quad.node_count
    for j, (t, w) in enumerate(zip(ts, ws)):
        term = np.zeros_like(total)
        for sign in (1.0, -1.0):
            lam = t * cmath.exp(1j * sign * rho)
            v = sla.solve(lam * Id - A.entries, x)
            v = Ah @ v
            v = sla.solve(lam * Id + B.entries, v)
            term -= sign * cmath.sqrt(lam) * cmath.exp(1j * sign * rho) * t * v
        total += w * term
        if j % 2 == 0:
            wc = quad.step * (1.0 if 0 < j < n - 1 else 0.5) * 2.0
            coarse += wc * term
    total /= 2j * np.pi
    coarse /= 2j * np.pi
    if check:
        defect = _stride2_defect(total, coarse)
        if defect > max(20.0 * math.sqrt(tol), 200.0 * tol):
            raise NotConverged(f"AS application stride-2 defect {defect:.3g}")
    return total


# ---------------------------------------------------------------------------
# the ray pairing


def pairing_coefficients(rho: float):
    """Coefficients (c_plus, c_minus) reconstructing <ASx, x'> from the
    half-line pairings; both have modulus 1/(2 pi)."""
    phase = cmath.exp(1j * (1.5 * rho - 0.5 * math.pi))
    return phase / (2 * math.pi), 1.0 / phase / (2 * math.pi)


def _pairing_quad(prob: OperatorSumProblem, tol: float) -> ContourQuadrature:
    # the half-line symbols see t*A, so the transition region sits at the
    # reciprocal of the eigenvalue magnitudes
    lo, hi = prob.scales()
    return halfline_quadrature(tol=tol, decay_zero=0.5, decay_inf=1.5,
                               margin=prob.margin(),
                               scale_lo=1.0 / hi, scale_hi=1.0 / lo)


def ray_pairing(prob: OperatorSumProblem, x: np.ndarray, xp: np.ndarray,
                sign: int, quad: ContourQuadrature | None = None,
                tol: float = 1e-8) -> complex:
    """P_sign = Int <psi(tB) phi(tA) x, phi(tA)^T x'> dt/t (bilinear pairing).

    psi and phi are the decay-matched pair attached to the contour angle of
    the problem; sign picks the ray.
    """
    if quad is None:
        quad = _pairing_quad(prob, tol)
    rho = prob.rho
    psi = psi_symbol(sign, rho)
    phi = phi_symbol(sign, rho)
    grid = SpectralSymbolGrid(prob.A)
    ts, ws = quad.t_grid(), quad.weights()
    x = np.asarray(x, dtype=np.complex128)
    xp = np.asarray(xp, dtype=np.complex128)
    if grid.usable:
        vals = grid.values(phi, ts)                      # (N, n)
        rows = (vals * (grid.Vi @ x)) @ grid.V.T         # phi(tA) x
        rows_t = (vals * (grid.V.T @ xp)) @ grid.Vi      # phi(tA)^T x'
    else:
        mats = grid.matrices(phi, ts)
        rows = np.einsum("jkl,l->jk", mats, x)
        rows_t = np.einsum("jlk,l->jk", mats, xp)
    u = cmath.exp(1j * sign * rho)
    Id = np.eye(prob.dim)
    out = 0.0 + 0.0j
    for t, w, r, rt in zip(ts, ws, rows, rows_t):
        v = sla.solve(u * Id + t * prob.B.entries, r)
        out += w * np.sum(v * rt)
    return out


def reconstruct_AS_pairing(prob: OperatorSumProblem, x: np.ndarray,
                           xp: np.ndarray, tol: float = 1e-8) -> complex:
    """<ASx, x'> rebuilt from the two ray pairings."""
    cp, cm = pairing_coefficients(prob.rho)
    return (cp * ray_pairing(prob, x, xp, +1, tol=tol)
            + cm * ray_pairing(prob, x, xp, -1, tol=tol))


@dataclasses.dataclass
class PairingChainBound:
    """Factorized bound (2 pi)^{-1} sum_s M_s K_s K'_s on ||A(A+B)^{-1}||_2."""
    bound: float
    norm_AS: float
    M_plus: float
    M_minus: float
    K_plus: float
    K_minus: float
    Kp_plus: float
    Kp_minus: float


def pairing_chain_bound(prob: OperatorSumProblem,
                        quad: ContourQuadrature | None = None,
                        tol: float = 1e-8) -> PairingChainBound:
    """Evaluate every factor of the pairing bound and the exact norm it caps.

    M_s is the sampled sup of ||psi_s(tB)||_2, K_s and K'_s are square
    roots of quadrature Gram norms of the phi_s family and its transpose
    family.  The bound is mathematically certain to dominate
    ||A(A+B)^{-1}||_2, so the pair (bound, norm) doubles as a self test.
    """
    if quad is None:
        quad = _pairing_quad(prob, tol)
    ts, ws = quad.t_grid(), quad.weights()
    grid = SpectralSymbolGrid(prob.A)
    Id = np.eye(prob.dim)
    # thin the sup-sampling grid: it estimates a sup of a smooth function
    step = max(1, len(ts) // 128)
    ts_sup = ts[::step]
    out = {}
    total = 0.0
    for sign, tag in ((+1, "plus"), (-1, "minus")):
        phi = phi_symbol(sign, prob.rho)
        G_left = grid.gram(phi, ts, ws, side="left")
        G_right = grid.gram(phi, ts, ws, side="right")
        K = math.sqrt(np.linalg.norm(G_left, 2))
        Kp = math.sqrt(np.linalg.norm(G_right, 2))
        u = cmath.exp(1j * sign * prob.rho)
        M = 0.0
        for t in ts_sup:
            sv = sla.svdvals(u * Id + t * prob.B.entries)
            M = max(M, 1.0 / sv[-1])
        out[f"M_{tag}"] = M
        out[f"K_{tag}"] = K
        out[f"Kp_{tag}"] = Kp
        total += M * K * Kp
    Sinv = dense_sum_inverse(prob)
    norm_AS = float(np.linalg.norm(prob.A.entries @ Sinv, 2))
    return PairingChainBound(bound=total / (2 * math.pi), norm_AS=norm_AS,
                             **out)


# ---------------------------------------------------------------------------
# closedness constants


@dataclasses.dataclass
class ClosednessRecord:
    C_hom: float
    C_graph: float
    norm_AS: float
    norm_BS: float
    trials: int
    seed: int
    norm: str


def _induced_norm(M: np.ndarray, spec: MixedNormSpec,
                  samples: np.ndarray | None) -> float:
    """Operator norm of M in the given vector norm.

    Exact for the unweighted p in {1, 2, inf}; otherwise the best sampled
    lower bound over the supplied witnesses (documented as such).
    """
    if spec.kind == "p" and spec.weights is None:
        if spec.p == 2.0:
            return float(np.linalg.norm(M, 2))
        if spec.p == 1.0:
            return float(np.max(np.sum(np.abs(M), axis=0)))
        if spec.p == math.inf:
            return float(np.max(np.sum(np.abs(M), axis=1)))
    best = 0.0
    if samples is not None:
        for v in samples:
            nv = mixed_norm(v, spec)
            if nv > 0:
                best = max(best, mixed_norm(M @ v, spec) / nv)
    return best


def closedness_constant(prob: OperatorSumProblem, trials: int = 1000,
                        seed: int = 0) -> ClosednessRecord:
    """Estimate sup (||Au|| + ||Bu||) / ||(A+B)u|| and its graph variant.

    Random trials are boosted with the top singular vectors of A(A+B)^{-1}
    and B(A+B)^{-1}, which pins C_hom between max(norm_AS, norm_BS) and
    norm_AS + norm_BS in the Euclidean case.
    """
    rng = substream(seed, "closedness", prob.label)
    Sinv = dense_sum_inverse(prob)
    AS = prob.A.entries @ Sinv
    BS = prob.B.entries @ Sinv
    n = prob.dim
    vs = rng.standard_normal((trials, n)) + 1j * rng.standard_normal((trials, n))
    # witness boost: right singular vectors of the two factor operators
    for M in (AS, BS):
        _, _, Vh = sla.svd(M)
        vs = np.vstack([vs, Vh[:1].conj()])
    C_hom = 0.0
    C_graph = 0.0
    for v in vs:
        u = Sinv @ v
        na = mixed_norm(prob.A.entries @ u, prob.norm)
        nb = mixed_norm(prob.B.entries @ u, prob.norm)
        nf = mixed_norm(v, prob.norm)
        nu = mixed_norm(u, prob.norm)
        if nf > 0:
            C_hom = max(C_hom, (na + nb) / nf)
            C_graph = max(C_graph, (nu + na + nb) / (nu + nf))
    norm_AS = _induced_norm(AS, prob.norm, vs)
    norm_BS = _induced_norm(BS, prob.norm, vs)
    return ClosednessRecord(C_hom=C_hom, C_graph=C_graph, norm_AS=norm_AS,
                            norm_BS=norm_BS, trials=trials, seed=seed,
                            norm=prob.norm.describe())
