"""Square-function, gamma, and mixed-integrability norms of symbol orbits.

All norms here are built from the orbit t -> t^{-theta} phi(tA) x sampled
on a log grid against dt/t.  The same grid evaluations back the scalar
norms, the quadrature Gram (whose operator norm is the exact best constant
in the Hilbert-space case), and the Monte Carlo gamma norm.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from ._util import substream
from .contour import (ContourQuadrature, HolomorphicSymbol,
                      SpectralSymbolGrid, halfline_quadrature)
from .core import LinearOperator, MixedNormSpec, as_operator, mixed_norm
from .errors import IncompatibleSpec, WeightOutOfRange

import scipy.linalg as sla


def spectral_grid(A: LinearOperator) -> SpectralSymbolGrid:
    """Per-operator cached eigendecomposition grid."""
    A = as_operator(A)
    grid = getattr(A, "_symbol_grid", None)
    if grid is None:
        grid = SpectralSymbolGrid(A)
        A._symbol_grid = grid
    return grid


@dataclasses.dataclass
class SquareFunctionSpec:
    """Orbit norm specification.

    p is the dt/t integrability exponent for lp_norm and gamma_norm, and
    the inner (per coordinate) exponent for tl_norm.  theta is the power
    weight t^{-theta}; it must satisfy eps0 > theta > -epsinf for the
    weighted symbol to keep two-sided decay.  norm is the ambient vector
    norm (the outer norm for tl_norm).
    """
    symbol: HolomorphicSymbol
    theta: float = 0.0
    p: float = 2.0
    quad: ContourQuadrature | None = None
    norm: MixedNormSpec = dataclasses.field(
        default_factory=lambda: MixedNormSpec.p_norm(2))

    def check_weight(self):
        if not (self.symbol.decay_at_zero > self.theta
                > -self.symbol.decay_at_infinity):
            raise WeightOutOfRange(
                f"theta={self.theta:g} outside "
                f"({-self.symbol.decay_at_infinity:g}, "
                f"{self.symbol.decay_at_zero:g}) for {self.symbol.label}")

    def resolve_quad(self, A: LinearOperator, tol: float = 1e-10,
                     theta_shift: float = 0.0) -> ContourQuadrature:
        """Half-line grid sized to the weighted symbol decay on this operator."""
        if self.quad is not None:
            return self.quad
        theta = self.theta + theta_shift
        mags = np.abs(as_operator(A).spectrum())
        ang = as_operator(A).spectral_angle()
        margin = min(self.symbol.holo_angle - ang, math.pi / 2)
        return halfline_quadrature(
            tol=tol, decay_zero=self.symbol.decay_at_zero - theta,
            decay_inf=self.symbol.decay_at_infinity + theta,
            margin=margin, scale_lo=1.0 / float(mags.max()),
            scale_hi=1.0 / float(mags.min()),
            c_env=self.symbol.envelope_constant())


def _orbit_rows(A, spec: SquareFunctionSpec, x: np.ndarray,
                tol: float = 1e-10):
    """Rows t_j^{-theta} phi(t_j A) x with the grid's weights."""
    A = as_operator(A)
    spec.check_weight()
    quad = spec.resolve_quad(A, tol)
    ts, ws = quad.t_grid(), quad.weights()
    grid = spectral_grid(A)
    rows = grid.apply_grid(spec.symbol, ts, np.asarray(x, np.complex128))
    if spec.theta != 0.0:
        rows = rows * (ts ** (-spec.theta))[:, None]
    return rows, ts, ws, quad


def lp_norm(A, x: np.ndarray, spec: SquareFunctionSpec,
            tol: float = 1e-10) -> float:
    """(Int ||t^{-theta} phi(tA) x||^p dt/t)^{1/p}; sup over the grid for
    p = inf."""
    rows, ts, ws, _ = _orbit_rows(A, spec, x, tol)
    vals = np.array([mixed_norm(r, spec.norm) for r in rows])
    if spec.p == math.inf:
        return float(np.max(vals))
    return float(np.sum(ws * vals ** spec.p) ** (1.0 / spec.p))


@dataclasses.dataclass
class GramResult:
    gram: np.ndarray
    constant: float          # ||G||^{1/2}: best constant in the p=2 bound
    quad: ContourQuadrature


def square_function_gram(A, symbol: HolomorphicSymbol,
                         quad: ContourQuadrature | None = None,
                         theta: float = 0.0, tol: float = 1e-10,
                         side: str = "left") -> GramResult:
    """G = Int (t^{-theta} phi(tA))^* (t^{-theta} phi(tA)) dt/t by quadrature.

    G is Hermitian positive semidefinite and x^* G x equals the squared
    p = 2 orbit norm on the same grid, so ||G||^{1/2} is the exact best
    constant of the square-function bound (Euclidean ambient norm).
    """
    A = as_operator(A)
    spec = SquareFunctionSpec(symbol=symbol, theta=theta, quad=quad)
    spec.check_weight()
    quad = spec.resolve_quad(A, tol)
    ts, ws = quad.t_grid(), quad.weights()
    grid = spectral_grid(A)
    G = grid.gram(symbol, ts, ws, theta=theta, side=side)
    return GramResult(gram=G, constant=float(math.sqrt(np.linalg.norm(G, 2))),
                      quad=quad)


@dataclasses.dataclass
class GammaEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int


def gamma_norm(A, x: np.ndarray, spec: SquareFunctionSpec,
               samples: int = 2000, seed: int = 0,
               tol: float = 1e-10) -> GammaEstimate:
    """Monte Carlo gamma-norm of the orbit: E || sum_j g_j w_j^{1/2} r_j ||^2
    over standard Gaussians g, reported as sqrt with a delta-method stderr.

    In the Euclidean case the expectation collapses to the squared p = 2
    orbit norm, which is the cross-check the estimator is tested against.
    """
    rows, ts, ws, _ = _orbit_rows(A, spec, x, tol)
    U = rows * np.sqrt(ws)[:, None]
    rng = substream(seed, "gamma_norm")
    g = rng.standard_normal((samples, U.shape[0]))
    sums = g @ U
    nrm2 = np.array([mixed_norm(s, spec.norm) for s in sums]) ** 2
    mean = float(np.mean(nrm2))
    if mean == 0.0:
        return GammaEstimate(0.0, 0.0, samples, seed)
    var = float(np.var(nrm2, ddof=1)) / samples
    est = math.sqrt(mean)
    return GammaEstimate(estimate=est,
                         stderr=0.5 * math.sqrt(var) / est,
                         samples=samples, seed=seed)


def tl_norm(A, x: np.ndarray, spec: SquareFunctionSpec,
            tol: float = 1e-10) -> float:
    """Outer norm of coordinate-wise inner integrals:
    || ( Int |t^{-theta} phi(tA) x|_i^q dt/t )^{1/q} ||_norm.

    spec.p plays the role of the inner exponent q here.
    """
    rows, ts, ws, _ = _orbit_rows(A, spec, x, tol)
    q = spec.p
    a = np.abs(rows)
    if q == math.inf:
        inner = np.max(a, axis=0)
    else:
        inner = (ws @ a ** q) ** (1.0 / q)
    return float(mixed_norm(inner, spec.norm))


def dual_tl_norm(A, xp: np.ndarray, spec: SquareFunctionSpec,
                 tol: float = 1e-10) -> float:
    """The dual-side companion of tl_norm for the same primal spec.

    Works on the transpose operator with weight t^{theta-1}, the conjugate
    inner exponent, and the dual outer norm; the vector is pulled through
    the inverse once, matching the one extra smoothing order the dual
    scale carries.
    """
    A = as_operator(A)
    At = A.transpose_operator()
    y = sla.solve(At.entries, np.asarray(xp, np.complex128))
    q = spec.p
    qd = math.inf if q == 1.0 else q / (q - 1.0)
    dual = SquareFunctionSpec(symbol=spec.symbol, theta=1.0 - spec.theta,
                              p=qd, quad=spec.quad,
                              norm=spec.norm.dual_spec())
    # t^{theta-1} = t^{-(1-theta)}: reuse the weighted-orbit plumbing
    return tl_norm(At, y, dual, tol)
