"""Holomorphic symbols, log-trapezoid contours, and the sector calculus.

Integrals along the boundary of a sector (and along the half line with
measure dt/t) are discretized by the trapezoid rule in s = log t, which
converges exponentially for integrands analytic in a strip around the
real s-axis.  Node counts and log ranges are sized automatically from the
symbol decay rates and the available angular margins.
"""
from __future__ import annotations

import dataclasses
import math
import re
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .core import LinearOperator, as_operator
from .errors import (ConfigError, ContourTooTight, NotConverged, SingularBase,
                     SingularResolvent)

EIG_COND_CAP = 1e8


@dataclasses.dataclass(eq=False)
class HolomorphicSymbol:
    """Scalar function holomorphic on a sector, with decay bookkeeping.

    eval_fn must accept numpy arrays of complex arguments.  decay_at_zero
    and decay_at_infinity are exponents eps with |phi(z)| <= C min(|z|^eps0,
    |z|^-epsinf) on the sector; decay_at_zero = 0 marks a symbol that is
    merely bounded near the origin.  matrix_eval, when present, evaluates
    phi on a matrix argument directly (used for non-diagonalizable inputs).
    """
    eval_fn: Callable
    holo_angle: float
    decay_at_zero: float
    decay_at_infinity: float
    label: str
    matrix_eval: Callable | None = None

    def __call__(self, z):
        return self.eval_fn(np.asarray(z, dtype=np.complex128))

    def envelope_constant(self, samples: int = 120) -> float:
        """Measured sup of |phi| / min(|z|^eps0, |z|^-epsinf) on test rays."""
        ang = min(self.holo_angle - 0.01, math.pi - 0.01)
        rays = [0.0]
        if ang > 0:
            rays += [ang, -ang]
        ts = np.logspace(-8, 8, samples)
        c = 0.0
        for a in rays:
            z = ts * np.exp(1j * a)
            env = np.minimum(ts ** max(self.decay_at_zero, 0.0),
                             ts ** (-self.decay_at_infinity))
            c = max(c, float(np.max(np.abs(self(z)) / env)))
        return c


def _off_cut(w: np.ndarray):
    # principal roots are only valid off the branch cut (-inf, 0]
    w = np.atleast_1d(w)
    if np.any((w.imag == 0.0) & (w.real <= 0.0)):
        raise SingularResolvent("symbol argument landed on the branch cut")


# ---------------------------------------------------------------------------
# symbol library


def psi_symbol(sign: int, rho: float) -> HolomorphicSymbol:
    """1 / (e^{+-i rho} + z): bounded at 0, decay 1 at infinity."""
    u = np.exp(1j * sign * rho)

    def ev(z):
        return 1.0 / (u + z)

    return HolomorphicSymbol(
        eval_fn=ev, holo_angle=math.pi - rho, decay_at_zero=0.0,
        decay_at_infinity=1.0, label="psi_plus" if sign > 0 else "psi_minus",
        matrix_eval=lambda M: sla.inv(u * np.eye(M.shape[0]) + M))


def phi_symbol(sign: int, rho: float) -> HolomorphicSymbol:
    """z^{1/4} (-e^{+-i rho} + z)^{-1/2}: decay 1/4 at both ends."""
    u = np.exp(1j * sign * rho)

    def ev(z):
        w = z - u
        _off_cut(w)
        return z ** 0.25 / np.sqrt(w)

    def mat(M):
        Id = np.eye(M.shape[0])
        root4 = sla.sqrtm(sla.sqrtm(M))
        return root4 @ sla.inv(sla.sqrtm(M - u * Id))

    return HolomorphicSymbol(
        eval_fn=ev, holo_angle=rho, decay_at_zero=0.25, decay_at_infinity=0.25,
        label="phi_plus" if sign > 0 else "phi_minus", matrix_eval=mat)


def rho_n_symbol(n: int) -> HolomorphicSymbol:
    """n/(n+z) - 1/(1+nz): vanishes at 0 and infinity, -> 1 pointwise."""
    n = int(n)
    if n < 1:
        raise ConfigError("approximant index must be a positive integer")

    def ev(z):
        return n / (n + z) - 1.0 / (1.0 + n * z)

    def mat(M):
        Id = np.eye(M.shape[0])
        return n * sla.inv(n * Id + M) - sla.inv(Id + n * M)

    return HolomorphicSymbol(eval_fn=ev, holo_angle=math.pi,
                             decay_at_zero=1.0, decay_at_infinity=1.0,
                             label=f"rho_n({n})", matrix_eval=mat)


def _p_inv(M):
    return sla.inv(np.eye(M.shape[0]) + M)


def z_over_1pz_sq() -> HolomorphicSymbol:
    return HolomorphicSymbol(
        eval_fn=lambda z: z / (1.0 + z) ** 2, holo_angle=math.pi,
        decay_at_zero=1.0, decay_at_infinity=1.0, label="z_over_1pz_sq",
        matrix_eval=lambda M: _p_inv(M) @ M @ _p_inv(M))


def z2_over_1pz_4() -> HolomorphicSymbol:
    def mat(M):
        T = _p_inv(M) @ M @ _p_inv(M)
        return T @ T

    return HolomorphicSymbol(
        eval_fn=lambda z: z ** 2 / (1.0 + z) ** 4, holo_angle=math.pi,
        decay_at_zero=2.0, decay_at_infinity=2.0, label="z2_over_1pz_4",
        matrix_eval=mat)


def z_over_1pz_cubed() -> HolomorphicSymbol:
    def mat(M):
        P = _p_inv(M)
        return P @ M @ P @ P

    return HolomorphicSymbol(
        eval_fn=lambda z: z / (1.0 + z) ** 3, holo_angle=math.pi,
        decay_at_zero=1.0, decay_at_infinity=2.0, label="z_over_1pz_cubed",
        matrix_eval=mat)


def power_shift(theta: float, base: HolomorphicSymbol) -> HolomorphicSymbol:
    """z^theta * base(z); shifts the decay window by theta."""
    eps0 = base.decay_at_zero + theta
    epsi = base.decay_at_infinity - theta
    if eps0 < 0 or epsi < 0:
        raise ConfigError(f"power shift {theta} leaves the decay window of "
                          f"{base.label}")

    def ev(z):
        _off_cut(z)
        return z ** theta * base.eval_fn(z)

    mat = None
    if base.matrix_eval is not None:
        def mat(M):
            return matrix_fractional_power(M, theta) @ base.matrix_eval(M)

    return HolomorphicSymbol(
        eval_fn=ev, holo_angle=base.holo_angle, decay_at_zero=eps0,
        decay_at_infinity=epsi,
        label=f"power_shift({theta:g},{base.label})", matrix_eval=mat)


_PLAIN_SYMBOLS = {
    "z_over_1pz_sq": z_over_1pz_sq,
    "z2_over_1pz_4": z2_over_1pz_4,
    "z_over_1pz_cubed": z_over_1pz_cubed,
}


def symbol_by_label(label: str, rho: float | None = None) -> HolomorphicSymbol:
    """Resolve a symbol label as used in run configurations."""
    label = label.strip()
    if label in _PLAIN_SYMBOLS:
        return _PLAIN_SYMBOLS[label]()
    if label in ("psi_plus", "psi_minus", "phi_plus", "phi_minus"):
        if rho is None:
            raise ConfigError(f"symbol {label} needs a contour angle rho")
        sign = 1 if label.endswith("plus") else -1
        return (psi_symbol if label.startswith("psi") else phi_symbol)(sign, rho)
    m = re.fullmatch(r"rho_n\((\d+)\)", label)
    if m:
        return rho_n_symbol(int(m.group(1)))
    m = re.fullmatch(r"power_shift\(([^,]+),(.+)\)", label)
    if m:
        return power_shift(float(m.group(1)), symbol_by_label(m.group(2), rho))
    raise ConfigError(f"unknown symbol label: {label!r}")


# ---------------------------------------------------------------------------
# quadratures


@dataclasses.dataclass(frozen=True)
class ContourQuadrature:
    """Log-trapezoid quadrature nodes.

    kind "sector_boundary": path runs in along arg = +rho from infinity to
    0, then out along arg = -rho, so the sector of the operator stays to
    the left.  kind "halfline_dt_over_t": plain half line with dt/t.
    node_count is per ray; nodes are t = e^s with s uniform on
    [log_lo, log_hi].
    """
    kind: str
    rho: float | None
    log_lo: float
    log_hi: float
    node_count: int = 401

    def __post_init__(self):
        if self.kind not in ("sector_boundary", "halfline_dt_over_t"):
            raise ConfigError(f"unknown quadrature kind {self.kind!r}")
        if self.kind == "sector_boundary" and self.rho is None:
            raise ConfigError("sector_boundary quadrature needs an angle rho")
        if self.log_hi <= self.log_lo:
            raise ConfigError("empty log range")
        if self.node_count < 3:
            raise ConfigError("need at least 3 nodes")

    @property
    def step(self) -> float:
        return (self.log_hi - self.log_lo) / (self.node_count - 1)

    def s_grid(self) -> np.ndarray:
        return np.linspace(self.log_lo, self.log_hi, self.node_count)

    def t_grid(self) -> np.ndarray:
        return np.exp(self.s_grid())

    def weights(self) -> np.ndarray:
        """Trapezoid weights in s, including the step."""
        w = np.full(self.node_count, self.step)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def refined(self, factor: int = 2) -> "ContourQuadrature":
        return dataclasses.replace(
            self, node_count=(self.node_count - 1) * factor + 1)


def _auto_step(margin: float, tol: float) -> float:
    # trapezoid-in-log error ~ exp(-2 pi d / step) for strip half-width d
    d = max(0.7 * margin, 0.02)
    return 2.0 * math.pi * d / math.log(100.0 / tol)


def _auto_range(decay_zero: float, decay_inf: float, tol: float,
                scale_lo: float, scale_hi: float, c_env: float = 1.0):
    budget = math.log(max(c_env, 1.0) * 100.0 / tol)
    lo = math.log(scale_lo) - budget / max(decay_zero, 0.05)
    hi = math.log(scale_hi) + budget / max(decay_inf, 0.05)
    return lo, hi


def _node_count(lo: float, hi: float, step: float,
                max_nodes: int = 24001) -> int:
    n = int(math.ceil((hi - lo) / step)) + 1
    n = min(max(n, 41), max_nodes)
    return n | 1  # odd, so the stride-2 subgrid is again a trapezoid rule


def sector_quadrature(rho: float, *, tol: float, decay_zero: float,
                      decay_inf: float, margin: float,
                      scale_lo: float = 1.0, scale_hi: float = 1.0,
                      c_env: float = 1.0) -> ContourQuadrature:
    lo, hi = _auto_range(decay_zero, decay_inf, tol, scale_lo, scale_hi, c_env)
    n = _node_count(lo, hi, _auto_step(margin, tol))
    return ContourQuadrature("sector_boundary", rho, lo, hi, n)


def halfline_quadrature(*, tol: float, decay_zero: float, decay_inf: float,
                        margin: float, scale_lo: float = 1.0,
                        scale_hi: float = 1.0,
                        c_env: float = 1.0) -> ContourQuadrature:
    lo, hi = _auto_range(decay_zero, decay_inf, tol, scale_lo, scale_hi, c_env)
    n = _node_count(lo, hi, _auto_step(margin, tol))
    return ContourQuadrature("halfline_dt_over_t", None, lo, hi, n)


def _eig_scales(A: LinearOperator):
    lam = np.abs(A.spectrum())
    return float(lam.min()), float(lam.max())


# ---------------------------------------------------------------------------
# the calculus


def _stride2_defect(full: np.ndarray, coarse: np.ndarray) -> float:
    ref = np.linalg.norm(full)
    if ref == 0.0:
        return float(np.linalg.norm(full - coarse))
    return float(np.linalg.norm(full - coarse) / ref)


def functional_calculus(A, symbol: HolomorphicSymbol,
                        quad: ContourQuadrature | None = None,
                        tol: float = 1e-10,
                        check: bool = True) -> LinearOperator:
    """Evaluate phi(A) = (2 pi i)^{-1} times the contour integral of
    phi(lam) R(lam, A) along the boundary of a sector.

    The contour angle must separate the spectrum of A from the region
    where the symbol loses holomorphy; the stride-2 trapezoid defect is
    used as the convergence certificate when check is set.
    """
    A = as_operator(A)
    ang = A.spectral_angle()
    if quad is None:
        if ang >= symbol.holo_angle - 1e-9:
            raise ContourTooTight(
                f"spectral angle {ang:.4g} leaves no room under the symbol "
                f"angle {symbol.holo_angle:.4g}")
        rho = 0.5 * (ang + symbol.holo_angle)
        s_lo, s_hi = _eig_scales(A)
        quad = sector_quadrature(
            rho, tol=tol, decay_zero=1.0 + symbol.decay_at_zero,
            decay_inf=symbol.decay_at_infinity,
            margin=min(rho - ang, symbol.holo_angle - rho),
            scale_lo=min(s_lo, 1.0), scale_hi=max(s_hi, 1.0),
            c_env=symbol.envelope_constant())
    if quad.kind != "sector_boundary":
        raise ConfigError("functional_calculus needs a sector_boundary contour")
    rho = float(quad.rho)
    if not (ang < rho < symbol.holo_angle + 1e-12):
        raise ContourTooTight(
            f"contour angle {rho:.4g} not in ({ang:.4g}, {symbol.holo_angle:.4g})")

    ts = quad.t_grid()
    ws = quad.weights()
    Id = np.eye(A.dim)
    total = np.zeros((A.dim, A.dim), dtype=np.complex128)
    coarse = np.zeros_like(total)
    n = quad.node_count
    for j, (t, w) in enumerate(zip(ts, ws)):
        term = np.zeros_like(total)
        for sign in (1.0, -1.0):
            lam = t * np.exp(1j * sign * rho)
            R = sla.lu_solve(sla.lu_factor(lam * Id - A.entries), Id)
            # d lam = sign-oriented: in along +rho (infinity -> 0), out along -rho
            term -= sign * symbol.eval_fn(np.complex128(lam)) * np.exp(1j * sign * rho) * t * R
        total += w * term
        if j % 2 == 0:
            wc = quad.step * (1.0 if 0 < j < n - 1 else 0.5) * 2.0
            coarse += wc * term
    total /= 2j * np.pi
    coarse /= 2j * np.pi
    if check:
        # the stride-2 subgrid doubles the step, so in the exponential
        # regime its error is about the square root of the fine error;
        # a defect beyond that scale means the quadrature is not converged
        defect = _stride2_defect(total, coarse)
        if defect > max(20.0 * math.sqrt(tol), 200.0 * tol):
            raise NotConverged(
                f"stride-2 contour defect {defect:.3g} above tolerance")
    return LinearOperator(total, label=f"{symbol.label}({A.label or 'A'})")


def matrix_fractional_power(M: np.ndarray, alpha: float) -> np.ndarray:
    """Principal fractional power of a bare matrix (eig, then Schur fallback)."""
    if alpha == 0.0:
        return np.eye(M.shape[0], dtype=np.complex128)
    w, V = sla.eig(M)
    if np.all(w != 0) and np.linalg.cond(V) < EIG_COND_CAP:
        return (V * w ** alpha) @ sla.inv(V)
    return np.asarray(sla.fractional_matrix_power(M, alpha), dtype=np.complex128)


def fractional_power(A, alpha: float, cond_cap: float = EIG_COND_CAP) -> LinearOperator:
    """A^alpha with the principal branch.

    Diagonalization is used while the eigenvector basis is well
    conditioned; otherwise the power is assembled from the regularized
    contour integral of z^{1+frac} (1+z)^{-3}, whose decay does not
    degenerate as frac approaches 0 or 1.
    """
    A = as_operator(A)
    lam = A.spectrum()
    if alpha == 0.0:
        return LinearOperator(np.eye(A.dim), label=f"{A.label}^0")
    if alpha != int(alpha) or alpha < 0:
        if np.any(np.abs(lam) == 0.0):
            raise SingularBase("fractional power of a singular operator")
    if alpha == int(alpha):
        k = int(alpha)
        out = np.linalg.matrix_power(A.entries, abs(k))
        if k < 0:
            out = sla.inv(out)
        return LinearOperator(out, label=f"{A.label}^{k}")

    k = math.floor(alpha)
    frac = alpha - k

    if A.is_hermitian():
        w, V = sla.eigh(A.entries)
        out = (V * w.astype(np.complex128) ** alpha) @ V.conj().T
        return LinearOperator(out, label=f"{A.label}^{alpha:g}")

    w, V = sla.eig(A.entries)
    if np.linalg.cond(V) < cond_cap:
        out = (V * w ** alpha) @ sla.inv(V)
        return LinearOperator(out, label=f"{A.label}^{alpha:g}")

    # regularized contour route; the symbol keeps decay >= 1 at both ends
    # for every frac in (0, 1), unlike the bare z^frac / (1+z)
    sym = HolomorphicSymbol(
        eval_fn=lambda z: z ** (1.0 + frac) / (1.0 + z) ** 3,
        holo_angle=math.pi, decay_at_zero=1.0 + frac,
        decay_at_infinity=2.0 - frac, label=f"z^{frac:g}-reg")
    F = functional_calculus(A, sym, tol=1e-11).entries
    Id = np.eye(A.dim)
    P = Id + A.entries
    out = F @ sla.solve(A.entries, P @ P @ P)
    if k != 0:
        Mk = np.linalg.matrix_power(A.entries, abs(k))
        out = out @ (Mk if k > 0 else sla.inv(Mk))
    return LinearOperator(out, label=f"{A.label}^{alpha:g}")


def imaginary_power(A, sigma: float, cond_cap: float = EIG_COND_CAP) -> LinearOperator:
    """A^{i sigma} with principal logarithms on the spectrum."""
    A = as_operator(A)
    lam = A.spectrum()
    if np.any(np.abs(lam) == 0.0):
        raise SingularBase("imaginary power of a singular operator")
    if sigma == 0.0:
        return LinearOperator(np.eye(A.dim), label=f"{A.label}^(i0)")
    if A.is_hermitian():
        w, V = sla.eigh(A.entries)
        out = (V * np.exp(1j * sigma * np.log(w.astype(np.complex128)))) @ V.conj().T
        return LinearOperator(out, label=f"{A.label}^(i{sigma:g})")
    w, V = sla.eig(A.entries)
    if np.linalg.cond(V) < cond_cap:
        out = (V * np.exp(1j * sigma * np.log(w))) @ sla.inv(V)
        return LinearOperator(out, label=f"{A.label}^(i{sigma:g})")

    def ev(z):
        _off_cut(z)
        return z ** (1.0 + 1j * sigma) / (1.0 + z) ** 3

    sym = HolomorphicSymbol(eval_fn=ev, holo_angle=math.pi,
                            decay_at_zero=1.0, decay_at_infinity=2.0,
                            label=f"z^(i{sigma:g})-reg")
    F = functional_calculus(A, sym, tol=1e-11).entries
    Id = np.eye(A.dim)
    P = Id + A.entries
    out = F @ sla.solve(A.entries, P @ P @ P)
    return LinearOperator(out, label=f"{A.label}^(i{sigma:g})")


@dataclasses.dataclass
class BipProfile:
    """Fit of log ||A^{i sigma}|| <= log M + theta |sigma|."""
    theta: float
    M: float
    sigmas: np.ndarray
    norms: np.ndarray

    def bound_at(self, sigma: float) -> float:
        return self.M * math.exp(self.theta * abs(sigma))


def bip_profile(A, sigma_max: float = 2.0, samples: int = 41) -> BipProfile:
    """Sample ||A^{i sigma}|| on a symmetric grid and fit the growth rate.

    The two half-axes are fitted separately (growth is often one-sided for
    rotated operators) and the reported theta is the worse slope, clamped
    at zero.
    """
    A = as_operator(A)
    sigmas = np.linspace(-sigma_max, sigma_max, samples)
    norms = np.array([
        np.linalg.norm(imaginary_power(A, float(s)).entries, 2) for s in sigmas])
    logs = np.log(norms)
    theta, intercept = 0.0, 0.0
    for side in (sigmas >= 0, sigmas <= 0):
        x = np.abs(sigmas[side])
        y = logs[side]
        slope, inter = np.polyfit(x, y, 1)
        if slope > theta:
            theta = float(slope)
        intercept = max(intercept, float(inter))
    return BipProfile(theta=max(theta, 0.0), M=float(math.exp(intercept)),
                      sigmas=sigmas, norms=norms)


def approximation_product(A, B, rho: float, n: int) -> LinearOperator:
    """U_n built from the rational approximants of the rotated pair.

    U_n = rho_n(e^{i(pi-rho)} A) rho_n(e^{-i rho} B) converges strongly to
    the identity as n grows when both rotations remain sectorial.
    """
    A, B = as_operator(A), as_operator(B)
    sym = rho_n_symbol(n)
    Ra = sym.matrix_eval(np.exp(1j * (math.pi - rho)) * A.entries)
    Rb = sym.matrix_eval(np.exp(-1j * rho) * B.entries)
    return LinearOperator(Ra @ Rb, label=f"U_{n}")


# ---------------------------------------------------------------------------
# symbol grids over diagonalizable operators


class SpectralSymbolGrid:
    """Cached eigendecomposition used to evaluate symbol grids phi(t_j A).

    Grams of the family t -> phi(tA) against dt/t reduce to Hadamard
    products of an n x n kernel matrix with Gram matrices of the
    eigenvector basis, which keeps large grids cheap.
    """

    def __init__(self, A, cond_cap: float = EIG_COND_CAP):
        A = as_operator(A)
        self.A = A
        if A.is_hermitian():
            w, V = sla.eigh(A.entries)
            self.lam = w.astype(np.complex128)
            self.V = V.astype(np.complex128)
            self.Vi = V.conj().T.astype(np.complex128)
            self.cond = 1.0
        else:
            w, V = sla.eig(A.entries)
            self.lam = w
            self.V = V
            self.cond = float(np.linalg.cond(V))
            self.Vi = sla.inv(V) if self.cond < cond_cap else None

    @property
    def usable(self) -> bool:
        return self.Vi is not None

    def values(self, symbol: HolomorphicSymbol, ts: np.ndarray) -> np.ndarray:
        """phi(t_j lam_k) as an (N, n) array."""
        return symbol.eval_fn(np.multiply.outer(np.asarray(ts), self.lam))

    def apply_grid(self, symbol: HolomorphicSymbol, ts: np.ndarray,
                   x: np.ndarray) -> np.ndarray:
        """Rows phi(t_j A) x, shape (N, n)."""
        if self.usable:
            y = self.Vi @ x
            return (self.values(symbol, ts) * y) @ self.V.T
        return np.stack([self._matrix(symbol, t) @ x for t in ts])

    def matrices(self, symbol: HolomorphicSymbol, ts: np.ndarray) -> np.ndarray:
        if self.usable:
            vals = self.values(symbol, ts)
            return np.einsum("ik,jk,kl->jil", self.V, vals, self.Vi)
        return np.stack([self._matrix(symbol, t) for t in ts])

    def _matrix(self, symbol: HolomorphicSymbol, t: float) -> np.ndarray:
        if symbol.matrix_eval is not None:
            return symbol.matrix_eval(t * self.A.entries)
        if self.usable:
            return (self.V * symbol.eval_fn(t * self.lam)) @ self.Vi
        raise SingularBase(
            "operator is too far from diagonalizable and the symbol has no "
            "structural matrix evaluation")

    def gram(self, symbol: HolomorphicSymbol, ts: np.ndarray,
             ws: np.ndarray, theta: float = 0.0,
             side: str = "left") -> np.ndarray:
        """Quadrature Gram of the family t^{-theta} phi(tA) against dt/t.

        side "left":  sum_j w_j g_j^* g_j   (column Gram)
        side "right": sum_j w_j g_j g_j^*   (row Gram; equals the transpose
        family's column Gram up to complex conjugation)
        """
        ts = np.asarray(ts)
        ws = np.asarray(ws)
        if self.usable:
            vals = self.values(symbol, ts)
            if theta != 0.0:
                vals = vals * (ts ** (-theta))[:, None]
            H = (vals.conj() * ws[:, None]).T @ vals
            if side == "left":
                G = self.Vi.conj().T @ (H * (self.V.conj().T @ self.V)) @ self.Vi
            else:
                G = self.V @ (H.T * (self.Vi @ self.Vi.conj().T)) @ self.V.conj().T
            return 0.5 * (G + G.conj().T)
        G = np.zeros((self.A.dim, self.A.dim), dtype=np.complex128)
        for t, w in zip(ts, ws):
            M = (t ** (-theta)) * self._matrix(symbol, t)
            G += w * (M.conj().T @ M if side == "left" else M @ M.conj().T)
        return 0.5 * (G + G.conj().T)
