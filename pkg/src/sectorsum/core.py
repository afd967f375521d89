"""Dense finite-dimensional operators, mixed norms, and sector profiles.

Everything downstream works on closed densely defined operators modelled as
complex square matrices: resolvents are direct solves, spectra come from a
dense eigensolver, and sector angles are measured rather than assumed.
"""
from __future__ import annotations

import dataclasses
import json
import math
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import IncompatibleSpec, SingularResolvent

# Solves at condition numbers beyond this are treated as singular.
RESOLVENT_COND_CAP = 1e12


class LinearOperator:
    """A dim x dim complex matrix with bookkeeping for sectoriality claims.

    Parameters
    ----------
    entries : array_like
        Square complex matrix.
    label : str
        Human-readable tag carried into reports.
    claimed_angle : float or None
        Sector angle the constructor believes the operator has; purely
        advisory, always cross-checked against the measured spectrum.
    """

    def __init__(self, entries, label: str = "", claimed_angle: float | None = None):
        M = np.array(entries, dtype=np.complex128)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise IncompatibleSpec(f"operator entries must be square, got {M.shape}")
        M.setflags(write=False)
        self.entries = M
        self.label = label
        self.claimed_angle = claimed_angle
        self._eig = None

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.entries @ x

    def transpose_operator(self) -> "LinearOperator":
        """Dual operator under the bilinear pairing sum_i x_i y_i."""
        return LinearOperator(self.entries.T, label=self.label + "'",
                              claimed_angle=self.claimed_angle)

    def spectrum(self) -> np.ndarray:
        if self._eig is None:
            self._eig = np.sort_complex(sla.eigvals(self.entries))
        return self._eig

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.spectrum())))

    def spectral_angle(self) -> float:
        """Largest |arg lambda| over the spectrum (0 not allowed in it)."""
        lam = self.spectrum()
        if np.any(np.abs(lam) == 0.0):
            return math.pi
        return float(np.max(np.abs(np.angle(lam))))

    def working_angle(self) -> float:
        """Angle used when picking contours: claimed angle if it is at least
        the measured spectral angle, else the measured one."""
        ang = self.spectral_angle()
        if self.claimed_angle is not None:
            ang = max(ang, float(self.claimed_angle))
        return ang

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        M = self.entries
        scale = max(1.0, float(np.abs(M).max()))
        return bool(np.abs(M - M.conj().T).max() <= tol * scale)

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "entries": [[[float(v.real), float(v.imag)] for v in row]
                        for row in self.entries],
            "label": self.label,
            "claimed_angle": self.claimed_angle,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "LinearOperator":
        dim = int(d["dim"])
        raw = d["entries"]
        if len(raw) != dim or any(len(row) != dim for row in raw):
            raise IncompatibleSpec("entries shape does not match declared dim")
        M = np.array([[complex(re, im) for re, im in row] for row in raw])
        return LinearOperator(M, label=d.get("label", ""),
                              claimed_angle=d.get("claimed_angle"))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json(s: str) -> "LinearOperator":
        return LinearOperator.from_json_dict(json.loads(s))

    def __repr__(self):
        return f"LinearOperator(dim={self.dim}, label={self.label!r})"


def as_operator(A, label: str = "", claimed_angle: float | None = None) -> LinearOperator:
    if isinstance(A, LinearOperator):
        return A
    return LinearOperator(A, label=label, claimed_angle=claimed_angle)


# ---------------------------------------------------------------------------
# resolvents


def resolvent_matrix(A: LinearOperator, lam: complex,
                     cond_cap: float = RESOLVENT_COND_CAP) -> np.ndarray:
    """Dense (lam - A)^{-1}; raises SingularResolvent past the condition cap."""
    M = lam * np.eye(A.dim) - A.entries
    sv = sla.svdvals(M)
    if sv[-1] == 0.0 or sv[0] / sv[-1] > cond_cap:
        raise SingularResolvent(
            f"lambda={lam:.6g} is numerically in the spectrum of {A.label or 'A'}")
    return sla.inv(M)


def resolvent(A: LinearOperator, lam: complex, y: np.ndarray,
              cond_cap: float = RESOLVENT_COND_CAP) -> np.ndarray:
    """Solve (lam - A) x = y with a one-step residual polish.

    Conditioning is checked with the cheap LAPACK gecon estimate after the
    LU factorization; the polish keeps the residual near machine precision
    for the well-conditioned solves the contour quadratures are built from.
    """
    y = np.asarray(y, dtype=np.complex128)
    M = lam * np.eye(A.dim) - A.entries
    try:
        lu = sla.lu_factor(M)
    except sla.LinAlgError as exc:  # exactly singular
        raise SingularResolvent(str(exc)) from exc
    anorm = np.linalg.norm(M, 1)
    rcond, info = sla.lapack.zgecon(lu[0], anorm)
    if info != 0 or rcond == 0.0 or 1.0 / rcond > cond_cap:
        raise SingularResolvent(
            f"lambda={lam:.6g} is numerically in the spectrum of {A.label or 'A'}")
    x = sla.lu_solve(lu, y)
    x += sla.lu_solve(lu, y - M @ x)
    return x


# ---------------------------------------------------------------------------
# sector profiles


@dataclasses.dataclass
class SectorProfile:
    """Measured sup of ||lam (lam - A)^{-1}|| along ray pairs.

    angles[i] is the ray angle, constants[i] the sampled sup over both rays
    arg(lam) = +/- angles[i]; t_grid records the sampled |lam| values so a
    refinement study can reproduce the measurement.
    """
    angles: list
    constants: list
    t_grid: np.ndarray
    label: str = ""

    def constant_at(self, angle: float) -> float:
        for a, c in zip(self.angles, self.constants):
            if abs(a - angle) <= 1e-12:
                return c
        raise KeyError(f"angle {angle} was not sampled")


def estimate_sector_profile(A: LinearOperator, angles: Sequence[float],
                            samples_per_ray: int = 256,
                            span_decades: float = 6.0,
                            cond_cap: float = RESOLVENT_COND_CAP) -> SectorProfile:
    """Sample sup ||lam R(lam, A)|| along rays arg lam = +/- angle.

    |lam| runs over a log grid spanning span_decades decades each side of
    the spectral radius.  A sample landing on the spectrum (condition
    number past cond_cap) raises SingularResolvent, which is the signal
    that the requested angle cuts into the spectrum.
    """
    from ._util import pmap

    s = A.spectral_radius()
    if s == 0.0:
        s = 1.0
    ts = s * np.logspace(-span_decades, span_decades, samples_per_ray)
    Id = np.eye(A.dim)

    def ray_sup(angle: float) -> float:
        best = 0.0
        for sign in (1.0, -1.0):
            phase = np.exp(1j * sign * angle)
            for t in ts:
                lam = t * phase
                sv = sla.svdvals(lam * Id - A.entries)
                if sv[-1] == 0.0 or sv[0] / sv[-1] > cond_cap:
                    raise SingularResolvent(
                        f"ray angle {angle:.6g} hits the spectrum near |lam|={t:.3g}")
                best = max(best, t / sv[-1])
            if angle in (0.0, math.pi):
                break  # the two rays coincide
        return best

    constants = pmap(ray_sup, list(angles))
    return SectorProfile(angles=list(angles), constants=constants,
                         t_grid=ts, label=A.label)


# ---------------------------------------------------------------------------
# constructors


def dirichlet_laplacian_1d(n: int, h: float = 1.0) -> LinearOperator:
    """Tridiagonal (-1, 2, -1)/h^2 second-difference matrix, Dirichlet ends."""
    M = (np.diag(2.0 * np.ones(n)) - np.diag(np.ones(n - 1), 1)
         - np.diag(np.ones(n - 1), -1)) / h ** 2
    return LinearOperator(M, label=f"laplace1d(n={n},h={h:g})", claimed_angle=0.0)


def time_derivative_operator(m: int, dt: float) -> LinearOperator:
    """Backward-difference derivative on m time nodes with u(0) = 0.

    Lower bidiagonal: 1/dt on the diagonal, -1/dt on the subdiagonal; the
    inverse is discrete convolution against a causal geometric kernel.  The
    angle claim is pi/2: the spectrum sits at 1/dt but the resolvent grows
    beyond any smaller angle as the grid refines.
    """
    M = (np.eye(m) - np.diag(np.ones(m - 1), -1)) / dt
    return LinearOperator(M, label=f"ddt(m={m},dt={dt:g})", claimed_angle=math.pi / 2)


def make_kronecker_pair(A0: LinearOperator, B0: LinearOperator,
                        commute_tol: float = 1e-13):
    """Lift (A0, B0) to the commuting pair (A0 (x) I, I (x) B0)."""
    n, m = A0.dim, B0.dim
    A = LinearOperator(np.kron(A0.entries, np.eye(m)),
                       label=f"{A0.label or 'A0'}(x)I", claimed_angle=A0.claimed_angle)
    B = LinearOperator(np.kron(np.eye(n), B0.entries),
                       label=f"I(x){B0.label or 'B0'}", claimed_angle=B0.claimed_angle)
    comm = A.entries @ B.entries - B.entries @ A.entries
    scale = np.linalg.norm(A.entries) * np.linalg.norm(B.entries)
    if scale > 0 and np.linalg.norm(comm) > commute_tol * scale:
        raise IncompatibleSpec("kronecker lift failed to commute")
    return A, B


# ---------------------------------------------------------------------------
# mixed norms


@dataclasses.dataclass(frozen=True)
class MixedNormSpec:
    """Weighted p-norm, or an outer-r / inner-q norm over consecutive blocks.

    kind "p": ||x|| = (sum_i w_i |x_i|^p)^(1/p), sup-type for p = inf
    (then ||x|| = max_i w_i |x_i|).

    kind "mixed": x is split into consecutive blocks of size block; each
    block is reduced by an unweighted inner q-norm, the block values by a
    weighted outer r-norm.  Weights, when given, are per block.
    """
    kind: str
    p: float = 2.0
    outer_r: float = 2.0
    inner_q: float = 2.0
    block: int = 1
    weights: tuple | None = None

    @staticmethod
    def p_norm(p: float, weights=None) -> "MixedNormSpec":
        if not (p >= 1.0):
            raise IncompatibleSpec(f"p must be >= 1, got {p}")
        return MixedNormSpec(kind="p", p=float(p),
                             weights=_as_weight_tuple(weights))

    @staticmethod
    def mixed(outer_r: float, inner_q: float, block: int,
              weights=None) -> "MixedNormSpec":
        if not (outer_r >= 1.0 and inner_q >= 1.0):
            raise IncompatibleSpec("norm exponents must be >= 1")
        if block < 1:
            raise IncompatibleSpec("inner block size must be positive")
        return MixedNormSpec(kind="mixed", outer_r=float(outer_r),
                             inner_q=float(inner_q), block=int(block),
                             weights=_as_weight_tuple(weights))

    def check_dim(self, dim: int):
        if self.kind == "mixed":
            if dim % self.block != 0:
                raise IncompatibleSpec(
                    f"dim {dim} not divisible by block size {self.block}")
            nblocks = dim // self.block
        else:
            nblocks = dim
        if self.weights is not None and len(self.weights) != nblocks:
            raise IncompatibleSpec(
                f"{len(self.weights)} weights for {nblocks} slots")

    def dual_spec(self) -> "MixedNormSpec":
        """Dual norm under the unweighted bilinear pairing."""
        if self.kind == "p":
            return MixedNormSpec(kind="p", p=_dual_exponent(self.p),
                                 weights=_dual_weights(self.p, self.weights))
        return MixedNormSpec(kind="mixed",
                             outer_r=_dual_exponent(self.outer_r),
                             inner_q=_dual_exponent(self.inner_q),
                             block=self.block,
                             weights=_dual_weights(self.outer_r, self.weights))

    def norm(self, x: np.ndarray) -> float:
        return mixed_norm(x, self)

    def describe(self) -> str:
        if self.kind == "p":
            return f"l{self.p:g}" + ("w" if self.weights else "")
        return f"l{self.outer_r:g}(l{self.inner_q:g},b{self.block})" + \
            ("w" if self.weights else "")


def _as_weight_tuple(weights):
    if weights is None:
        return None
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise IncompatibleSpec("weights must be strictly positive")
    return tuple(float(v) for v in w)


def _dual_exponent(p: float) -> float:
    if p == 1.0:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


def _dual_weights(p: float, weights):
    if weights is None:
        return None
    w = np.asarray(weights, dtype=float)
    if p == 1.0 or p == math.inf:
        return tuple(1.0 / w)
    pd = _dual_exponent(p)
    return tuple(w ** (1.0 - pd))


def _p_reduce(v: np.ndarray, p: float, weights, axis=None) -> float | np.ndarray:
    if p == math.inf:
        if weights is not None:
            v = v * weights
        return np.max(v, axis=axis)
    if weights is not None:
        return (np.sum(weights * v ** p, axis=axis)) ** (1.0 / p)
    return (np.sum(v ** p, axis=axis)) ** (1.0 / p)


def mixed_norm(x: np.ndarray, spec: MixedNormSpec) -> float:
    """Evaluate the norm described by spec on the vector x."""
    x = np.asarray(x)
    if x.ndim != 1:
        raise IncompatibleSpec("mixed_norm expects a vector")
    spec.check_dim(x.shape[0])
    a = np.abs(x)
    if spec.kind == "p":
        w = np.asarray(spec.weights) if spec.weights is not None else None
        return float(_p_reduce(a, spec.p, w))
    blocks = a.reshape(-1, spec.block)
    inner = _p_reduce(blocks, spec.inner_q, None, axis=1)
    w = np.asarray(spec.weights) if spec.weights is not None else None
    return float(_p_reduce(inner, spec.outer_r, w))
