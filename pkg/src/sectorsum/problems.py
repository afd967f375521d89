"""Seeded test-problem constructors shared by the suites and the CLI.

The standard battery holds twenty commuting pairs in three shapes:
diagonal pairs with controlled spectral angles, Jordan-perturbed pairs
(non-normal A with a commuting polynomial B), and Kronecker heat pairs
lifted from a 1-d Laplacian and a backward time difference.
"""

import math

import numpy as np

from ._util import substream
from .core import (LinearOperator, dirichlet_laplacian_1d)
from .errors import ConfigError
from .maxreg import ParabolicProblem
from .opsum import OperatorSumProblem

__all__ = [
    "diagonal_pair", "jordan_pair", "heat_problem", "heat_pair",
    "standard_battery", "battery_labels", "problem_from_config",
    "operator_from_config", "parabolic_from_config",
]

DIAG_DIMS = (2, 3, 4, 6, 8, 12, 16, 24)
JORDAN_DIMS = (2, 3, 4, 6, 8, 12, 16)
HEAT_SHAPES = ((4, 4), (4, 8), (8, 8), (8, 16), (16, 16))


def _seeded_diag(rng, dim: int, angle: float) -> np.ndarray:
    """Diagonal spectrum: log-uniform moduli, arguments within +/- angle."""
    mags = 10.0 ** rng.uniform(-1.0, 1.0, size=dim)
    args = rng.uniform(-angle, angle, size=dim)
    return mags * np.exp(1j * args)


def diagonal_pair(dim: int, seed: int = 0) -> OperatorSumProblem:
    """Commuting diagonal pair: A inside angle pi/6, B inside pi/4."""
    rng = substream(seed, "battery", "diag", dim)
    A = LinearOperator(np.diag(_seeded_diag(rng, dim, math.pi / 6)),
                       label=f"diagA{dim}", claimed_angle=math.pi / 6)
    B = LinearOperator(np.diag(_seeded_diag(rng, dim, math.pi / 4)),
                       label=f"diagB{dim}", claimed_angle=math.pi / 4)
    return OperatorSumProblem(A=A, B=B, label=f"diag{dim}")


def jordan_pair(dim: int, seed: int = 0,
                eps: float = 1e-2) -> OperatorSumProblem:
    """Non-normal pair: A is a perturbed Jordan-like matrix, B = b0 + b1 A.

    B is a polynomial in A, so the pair commutes exactly no matter how far
    A is from normal.
    """
    rng = substream(seed, "battery", "jordan", dim)
    diag = np.linspace(1.0, 3.0, dim) * (1.0 + 0.05 * rng.random(dim))
    Am = np.diag(diag).astype(np.complex128)
    Am += eps * np.diag(np.ones(dim - 1), 1)
    b0 = 0.5 + rng.random()
    b1 = 0.5 + rng.random()
    Bm = b0 * np.eye(dim) + b1 * Am
    A = LinearOperator(Am, label=f"jordA{dim}", claimed_angle=math.pi / 6)
    B = LinearOperator(Bm, label=f"jordB{dim}", claimed_angle=math.pi / 6)
    return OperatorSumProblem(A=A, B=B, label=f"jordan{dim}")


def heat_problem(n: int, m: int, h: float = 1.0,
                 dt: float = 0.5) -> ParabolicProblem:
    """Backward-Euler heat problem on a 1-d Dirichlet Laplacian."""
    return ParabolicProblem(A0=dirichlet_laplacian_1d(n, h), m=m, dt=dt,
                            label=f"heat-n{n}-m{m}")


def heat_pair(n: int, m: int, h: float = 1.0,
              dt: float = 0.5) -> OperatorSumProblem:
    """The lifted commuting pair of a heat problem (dim n*m)."""
    return heat_problem(n, m, h, dt).lifted()


def standard_battery(seed: int = 0) -> list:
    """The twenty commuting pairs used by the operator-sum acceptance run."""
    probs = [diagonal_pair(d, seed) for d in DIAG_DIMS]
    probs += [jordan_pair(d, seed) for d in JORDAN_DIMS]
    probs += [heat_pair(n, m) for n, m in HEAT_SHAPES]
    return probs


def battery_labels(seed: int = 0) -> list:
    return [p.label for p in standard_battery(seed)]


def problem_from_config(cfg: dict, seed: int = 0) -> OperatorSumProblem:
    """Resolve one pair description from a run configuration.

    kinds: diagonal {dim}, jordan {dim, eps}, heat {n, m, h, dt},
    explicit {A, B, rho} with operators in the JSON form of LinearOperator.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("problem spec must be an object")
    kind = cfg.get("kind")
    known = {
        "diagonal": {"kind", "dim", "seed"},
        "jordan": {"kind", "dim", "seed", "eps"},
        "heat": {"kind", "n", "m", "h", "dt"},
        "explicit": {"kind", "A", "B", "rho", "label"},
    }
    if kind not in known:
        raise ConfigError(f"unknown problem kind {kind!r}")
    extra = set(cfg) - known[kind]
    if extra:
        raise ConfigError(f"unknown problem keys {sorted(extra)}")
    seed = int(cfg.get("seed", seed))
    if kind == "diagonal":
        return diagonal_pair(int(cfg["dim"]), seed)
    if kind == "jordan":
        return jordan_pair(int(cfg["dim"]), seed,
                           eps=float(cfg.get("eps", 1e-2)))
    if kind == "heat":
        return heat_pair(int(cfg["n"]), int(cfg["m"]),
                         h=float(cfg.get("h", 1.0)),
                         dt=float(cfg.get("dt", 0.5)))
    A = LinearOperator.from_json_dict(cfg["A"])
    B = LinearOperator.from_json_dict(cfg["B"])
    return OperatorSumProblem(A=A, B=B, rho=cfg.get("rho"),
                              label=cfg.get("label", ""))


def operator_from_config(cfg: dict) -> LinearOperator:
    """Resolve one operator description.

    kinds: laplacian {n, h}, explicit {dim, entries as [re, im] pairs,
    label, claimed_angle}.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("operator spec must be an object")
    kind = cfg.get("kind", "explicit")
    known = {
        "laplacian": {"kind", "n", "h"},
        "explicit": {"kind", "dim", "entries", "label", "claimed_angle"},
    }
    if kind not in known:
        raise ConfigError(f"unknown operator kind {kind!r}")
    extra = set(cfg) - known[kind]
    if extra:
        raise ConfigError(f"unknown operator keys {sorted(extra)}")
    if kind == "laplacian":
        return dirichlet_laplacian_1d(int(cfg["n"]),
                                      float(cfg.get("h", 1.0)))
    try:
        return LinearOperator.from_json_dict(cfg)
    except KeyError as exc:
        raise ConfigError(f"operator spec missing key {exc}") from exc


def parabolic_from_config(cfg: dict) -> ParabolicProblem:
    """Resolve a discrete parabolic problem description.

    keys: n, m, dt required; h, p, q, theta, seed, trials, refinement,
    label optional.  The space operator is the 1-d Dirichlet Laplacian;
    pass an explicit operator under "A0" to override it.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("parabolic spec must be an object")
    known = {"n", "m", "dt", "h", "p", "q", "theta", "seed", "trials",
             "refinement", "label", "A0"}
    extra = set(cfg) - known
    if extra:
        raise ConfigError(f"unknown parabolic keys {sorted(extra)}")
    for req in ("m", "dt"):
        if req not in cfg:
            raise ConfigError(f"parabolic spec needs {req!r}")
    if "A0" in cfg:
        A0 = operator_from_config(cfg["A0"])
    elif "n" in cfg:
        A0 = dirichlet_laplacian_1d(int(cfg["n"]),
                                    float(cfg.get("h", 1.0)))
    else:
        raise ConfigError("parabolic spec needs 'n' or 'A0'")
    label = cfg.get("label", f"parabolic-n{A0.dim}-m{int(cfg['m'])}")
    return ParabolicProblem(A0, m=int(cfg["m"]), dt=float(cfg["dt"]),
                            p=float(cfg.get("p", 2.0)),
                            theta=float(cfg.get("theta", 0.5)),
                            q=float(cfg.get("q", 2.0)), label=label)
