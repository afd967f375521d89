"""Premade problem batteries and config-dict resolution.

TestBattery         the twenty-pair commuting battery
TestProblemConfig   problem_from_config kinds and key validation
TestOperatorConfig  operator_from_config kinds and key validation
TestParabolicConfig parabolic_from_config keys and defaults
"""

import math

import numpy as np
import pytest

from sectorsum.core import dirichlet_laplacian_1d
from sectorsum.errors import ConfigError
from sectorsum.problems import (DIAG_DIMS, HEAT_SHAPES, JORDAN_DIMS,
                                battery_labels, diagonal_pair, heat_pair,
                                heat_problem, jordan_pair,
                                operator_from_config, parabolic_from_config,
                                problem_from_config, standard_battery)


def _commutator_scale(prob):
    A, B = prob.A.entries, prob.B.entries
    return np.linalg.norm(A @ B - B @ A) / (
        np.linalg.norm(A) * np.linalg.norm(B))


class TestBattery:
    """Composition and invariants of the standard battery."""

    def test_size_and_unique_labels(self):
        probs = standard_battery(seed=0)
        assert len(probs) == len(DIAG_DIMS) + len(JORDAN_DIMS) + \
            len(HEAT_SHAPES) == 20
        labels = [p.label for p in probs]
        assert len(set(labels)) == 20
        assert labels == battery_labels(seed=0)

    def test_all_pairs_commute(self):
        for prob in standard_battery(seed=0):
            assert _commutator_scale(prob) < 1e-12, prob.label

    def test_diagonal_pair_is_diagonal(self):
        prob = diagonal_pair(4, seed=3)
        assert np.all(prob.A.entries == np.diag(np.diag(prob.A.entries)))
        assert prob.A.spectral_angle() <= math.pi / 6 + 1e-12
        assert prob.B.spectral_angle() <= math.pi / 4 + 1e-12

    def test_jordan_pair_commutes_despite_nonnormality(self):
        """B is a polynomial in A, so the commutator vanishes even
        though A is far from normal."""
        prob = jordan_pair(6, seed=1, eps=0.5)
        A = prob.A.entries
        assert np.linalg.norm(A @ A.conj().T - A.conj().T @ A) > 1e-3
        assert _commutator_scale(prob) < 1e-13

    def test_heat_pair_dims(self):
        prob = heat_pair(4, 6)
        assert prob.A.dim == 24
        assert heat_problem(4, 6).label == "heat-n4-m6"

    def test_seed_changes_diagonal_battery(self):
        a = diagonal_pair(4, seed=0).A.entries
        b = diagonal_pair(4, seed=1).A.entries
        assert np.linalg.norm(a - b) > 0.0


class TestProblemConfig:
    """problem_from_config kinds, defaults, key checking."""

    def test_diagonal_round_trip(self):
        got = problem_from_config({"kind": "diagonal", "dim": 3, "seed": 2})
        want = diagonal_pair(3, seed=2)
        np.testing.assert_allclose(got.A.entries, want.A.entries)
        assert got.label == want.label

    def test_fallback_seed_argument(self):
        got = problem_from_config({"kind": "diagonal", "dim": 3}, seed=5)
        want = diagonal_pair(3, seed=5)
        np.testing.assert_allclose(got.B.entries, want.B.entries)

    def test_jordan_kind(self):
        got = problem_from_config({"kind": "jordan", "dim": 4, "eps": 0.2})
        want = jordan_pair(4, seed=0, eps=0.2)
        np.testing.assert_allclose(got.A.entries, want.A.entries)

    def test_heat_kind(self):
        got = problem_from_config({"kind": "heat", "n": 3, "m": 4,
                                   "dt": 0.25})
        assert got.A.dim == 12

    def test_explicit_kind(self):
        base = diagonal_pair(2, seed=0)
        cfg = {"kind": "explicit", "A": base.A.to_json_dict(),
               "B": base.B.to_json_dict(), "label": "pair"}
        got = problem_from_config(cfg)
        np.testing.assert_allclose(got.A.entries, base.A.entries)
        assert got.label == "pair"

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            problem_from_config({"kind": "toeplitz", "dim": 3})

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            problem_from_config({"kind": "diagonal", "dim": 3, "gamma": 1})

    def test_non_dict(self):
        with pytest.raises(ConfigError):
            problem_from_config(["diagonal", 3])


class TestOperatorConfig:
    """operator_from_config kinds and failure modes."""

    def test_laplacian(self):
        got = operator_from_config({"kind": "laplacian", "n": 5, "h": 0.5})
        want = dirichlet_laplacian_1d(5, 0.5)
        np.testing.assert_allclose(got.entries, want.entries)

    def test_explicit_round_trip(self):
        base = dirichlet_laplacian_1d(3, 1.0)
        got = operator_from_config(base.to_json_dict())
        np.testing.assert_allclose(got.entries, base.entries)
        assert got.claimed_angle == base.claimed_angle

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            operator_from_config({"kind": "toeplitz", "n": 3})

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            operator_from_config({"kind": "laplacian", "n": 3, "mass": 1.0})

    def test_missing_entries(self):
        with pytest.raises(ConfigError):
            operator_from_config({"kind": "explicit", "dim": 2})


class TestParabolicConfig:
    """parabolic_from_config keys, defaults, and the A0 override."""

    def test_laplacian_shorthand(self):
        prob = parabolic_from_config({"n": 4, "m": 6, "dt": 0.5})
        assert prob.n == 4 and prob.m == 6 and prob.dt == 0.5
        assert prob.p == 2.0 and prob.theta == 0.5 and prob.q == 2.0
        assert prob.label == "parabolic-n4-m6"

    def test_explicit_A0_override(self):
        cfg = {"A0": {"kind": "laplacian", "n": 3}, "m": 4, "dt": 0.25,
               "label": "custom"}
        prob = parabolic_from_config(cfg)
        assert prob.n == 3 and prob.label == "custom"

    def test_missing_required(self):
        with pytest.raises(ConfigError):
            parabolic_from_config({"n": 4, "dt": 0.5})
        with pytest.raises(ConfigError):
            parabolic_from_config({"m": 4, "dt": 0.5})

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            parabolic_from_config({"n": 4, "m": 6, "dt": 0.5, "nu": 1.0})
