"""Suite dispatch and the command line contract.

TestRunSuite     suite registry, row invariants, tolerance scaling
TestNormTables   builtin and config-driven lpnorm tables
TestCliRun       run subcommand: exit codes, determinism, outputs
TestCliTables    opsum / lpnorm / bounds / mellin / maxreg subcommands
"""

import json
import math

import numpy as np
import pytest

from sectorsum import cli, suites
from sectorsum.core import dirichlet_laplacian_1d
from sectorsum.errors import ConfigError
from sectorsum.report import strip_timestamp


def _write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


class TestRunSuite:
    """The suite registry and shared row invariants."""

    def test_unknown_suite_rejected(self):
        with pytest.raises(ConfigError):
            suites.run_suite("spectral")

    def test_cheap_suites_pass(self):
        for name in ("sector", "calculus", "bounds"):
            rows = suites.run_suite(name, seed=0)
            assert rows, name
            assert all(r.passed for r in rows), \
                [f"{r.case}/{r.metric}" for r in rows if not r.passed]
            assert all(r.suite == name for r in rows)

    def test_case_metric_pairs_unique(self):
        for name in ("sector", "calculus", "bounds"):
            rows = suites.run_suite(name, seed=0)
            keys = [(r.case, r.metric) for r in rows]
            assert len(keys) == len(set(keys)), name

    def test_mellin_parts(self):
        rows = suites.mellin_suite(seed=0, parts=("gamma", "nielsen"))
        assert rows and all(r.passed for r in rows)
        assert any(r.provenance == "paper_table" for r in rows)

    def test_tol_scale_turns_rows_into_failures(self):
        """Shrinking every tolerance makes nonzero defects fail while
        exact boolean rows keep passing."""
        rows = suites.run_suite("sector", seed=0, tol_scale=1e-14)
        assert any(not r.passed for r in rows)
        assert any(r.passed for r in rows)


class TestNormTables:
    """Builtin and config-driven lpnorm tables."""

    def test_builtin_table(self):
        columns, records = suites.lpnorm_table(seed=0)
        assert "p_or_q" in columns and len(records) == 4
        assert all(r["refinement_defect"] < 1e-6 for r in records)

    def test_config_table_known_value(self):
        """A one-hot vector on the Laplacian reproduces the exact
        B(2,2) = 1/6 identity through the config path."""
        cfg = {
            "operator": {"kind": "laplacian", "n": 4},
            "x": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            "cases": [{"symbol": "z_over_1pz_sq", "kind": "lp", "p": 2.0}],
        }
        _, records = suites.lpnorm_config_table(cfg, seed=0)
        np.testing.assert_allclose(records[0]["value"],
                                   math.sqrt(1.0 / 6.0), rtol=1e-9)

    def test_config_table_validation(self):
        base = {"operator": {"kind": "laplacian", "n": 3},
                "cases": [{"symbol": "z_over_1pz_sq"}]}
        for breaker in (
                {"extra": 1},
                {"operator": None, "cases": None},
                {"cases": []},
                {"cases": [{"symbol": "z_over_1pz_sq", "mode": "x"}]},
                {"cases": [{"symbol": "z_over_1pz_sq", "kind": "sup"}]}):
            cfg = dict(base)
            cfg.update(breaker)
            cfg = {k: v for k, v in cfg.items() if v is not None}
            with pytest.raises(ConfigError):
                suites.lpnorm_config_table(cfg, seed=0)


class TestCliRun:
    """The run subcommand end to end."""

    def test_pass_run_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "rows.csv"
        code = cli.main(["run", "--suite", "sector", "--seed", "3",
                         "--out", str(out), "--no-figures"])
        assert code == 0
        text = out.read_text()
        assert text.startswith("# sectorsum suite=sector seed=3 ")
        assert "FAIL" not in text
        assert "wrote" in capsys.readouterr().out

    def test_deterministic_bodies(self, tmp_path):
        outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for out in outs:
            assert cli.main(["run", "--suite", "sector", "--seed", "5",
                             "--out", str(out), "--no-figures"]) == 0
        a, b = (strip_timestamp(o.read_text()) for o in outs)
        assert a == b

    def test_config_file_supplies_defaults(self, tmp_path):
        out = tmp_path / "rows.csv"
        cfg = _write_json(tmp_path / "cfg.json",
                          {"suite": "sector", "seed": 9, "out": str(out)})
        assert cli.main(["run", "--config", cfg, "--no-figures"]) == 0
        assert "suite=sector seed=9" in out.read_text().splitlines()[0]

    def test_failure_exit_code_still_writes(self, tmp_path, capsys):
        out = tmp_path / "rows.csv"
        code = cli.main(["run", "--suite", "sector", "--tol-scale", "1e-14",
                         "--out", str(out), "--no-figures"])
        assert code == 1
        assert "FAIL" in capsys.readouterr().err
        assert "FAIL" in out.read_text()

    def test_config_errors_exit_2(self, tmp_path, capsys):
        bad_json = tmp_path / "bad.json"
        bad_json.write_text("{not json")
        cases = (
            ["run", "--config", str(tmp_path / "missing.json")],
            ["run", "--config", str(bad_json)],
            ["run", "--config", _write_json(tmp_path / "c1.json",
                                            {"suites": ["sector"]})],
            ["run", "--config", _write_json(tmp_path / "c2.json",
                                            {"suite": []})],
            ["run", "--config", _write_json(tmp_path / "c3.json",
                                            {"suite": "spectral"})],
        )
        for argv in cases:
            code = cli.main(argv + ["--no-figures",
                                    "--out", str(tmp_path / "o.csv")])
            assert code == 2, argv
            assert "config error" in capsys.readouterr().err

    def test_bad_choice_is_argparse_error(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["run", "--suite", "spectral"])
        assert exc.value.code == 2

    def test_negative_seed_rejected(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["run", "--suite", "sector", "--seed", "-1"])
        assert exc.value.code == 2

    def test_figures_written_by_default(self, tmp_path):
        out = tmp_path / "rows.csv"
        assert cli.main(["run", "--suite", "sector",
                         "--out", str(out)]) == 0
        assert (tmp_path / "rows.png").exists()

    def test_bounds_suite_emits_witness_sidecar(self, tmp_path):
        out = tmp_path / "rows.csv"
        assert cli.main(["run", "--suite", "bounds", "--seed", "1",
                         "--out", str(out), "--no-figures"]) == 0
        payload = json.loads((tmp_path / "rows_witness.json").read_text())
        assert payload["seed"] == 1
        assert payload["witnesses"]
        w = payload["witnesses"][0]
        assert {"case", "kind", "lower_bound", "witness"} <= set(w)


class TestCliTables:
    """The per-module table subcommands."""

    def test_opsum_single_problem(self, tmp_path):
        out = tmp_path / "opsum.csv"
        cfg = _write_json(tmp_path / "p.json",
                          {"kind": "diagonal", "dim": 3})
        assert cli.main(["opsum", "--config", cfg, "--out", str(out),
                         "--no-figures"]) == 0
        lines = out.read_text().splitlines()
        header = lines[2].split(",")
        assert "dpg_bound" in header and "residual" in header
        assert len(lines) == 4  # two comments, one header, one record

    def test_lpnorm_builtin(self, tmp_path):
        out = tmp_path / "norms.csv"
        assert cli.main(["lpnorm", "--out", str(out),
                         "--no-figures"]) == 0
        assert "p_or_q" in out.read_text().splitlines()[2]

    def test_lpnorm_config(self, tmp_path):
        out = tmp_path / "norms.csv"
        cfg = _write_json(tmp_path / "n.json", {
            "operator": {"kind": "laplacian", "n": 4},
            "cases": [{"symbol": "z2_over_1pz_4", "kind": "tl",
                       "q": 2.0, "theta": 0.5}],
        })
        assert cli.main(["lpnorm", "--config", cfg, "--out", str(out),
                         "--no-figures"]) == 0

    def test_bounds_members_and_witness(self, tmp_path):
        out = tmp_path / "bounds.csv"
        from sectorsum.core import as_operator
        A = dirichlet_laplacian_1d(3, 1.0)
        A2 = as_operator(2.0 * A.entries, label="lap2x")
        fam = _write_json(tmp_path / "fam.json", {
            "label": "laps",
            "members": [A.to_json_dict(), A2.to_json_dict()],
            "n_ops": 2, "trials": 10,
        })
        assert cli.main(["bounds", "--family", fam, "--kind", "r",
                         "--out", str(out), "--no-figures"]) == 0
        payload = json.loads((tmp_path / "bounds_witness.json").read_text())
        np.testing.assert_allclose(payload["replayed"],
                                   payload["lower_bound"], rtol=1e-12)
        assert "lower_bound" in out.read_text().splitlines()[2]

    def test_bounds_resolvent_ray(self, tmp_path):
        out = tmp_path / "bounds.csv"
        fam = _write_json(tmp_path / "fam.json", {
            "resolvent_ray": {
                "operator": {"kind": "laplacian", "n": 2},
                "angle": math.pi / 2, "samples_per_ray": 8,
            },
            "q": 2.0, "n_ops": 2, "trials": 5,
        })
        assert cli.main(["bounds", "--family", fam, "--kind", "lq",
                         "--out", str(out), "--no-figures"]) == 0

    def test_bounds_family_validation(self, tmp_path, capsys):
        bad = (
            {"members": [], "resolvent_ray": {}},
            {},
            {"members": [{"kind": "laplacian", "n": 2}], "angle": 0.1},
        )
        for payload in bad:
            fam = _write_json(tmp_path / "fam.json", payload)
            code = cli.main(["bounds", "--family", fam, "--kind", "r",
                             "--out", str(tmp_path / "b.csv"),
                             "--no-figures"])
            assert code == 2, payload
            assert "config error" in capsys.readouterr().err

    def test_mellin_single_part(self, tmp_path):
        out = tmp_path / "mellin.csv"
        assert cli.main(["mellin", "--suite", "gamma", "--out", str(out),
                         "--no-figures"]) == 0
        assert out.read_text().startswith("# sectorsum suite=mellin:gamma ")
        with pytest.raises(SystemExit):
            cli.main(["mellin", "--suite", "zeta"])

    def test_maxreg_from_config(self, tmp_path):
        out = tmp_path / "maxreg.csv"
        cfg = _write_json(tmp_path / "m.json",
                          {"n": 3, "m": 4, "dt": 0.5, "trials": 4,
                           "refinement": [1, 2]})
        assert cli.main(["maxreg", "--config", cfg, "--out", str(out),
                         "--no-figures"]) == 0
        lines = out.read_text().splitlines()
        assert "C_p" in lines[2].split(",")
        assert len(lines) == 5  # base grid plus one refinement record

    def test_maxreg_bad_config(self, tmp_path, capsys):
        cfg = _write_json(tmp_path / "m.json", {"n": 3, "dt": 0.5})
        assert cli.main(["maxreg", "--config", cfg, "--no-figures",
                         "--out", str(tmp_path / "m.csv")]) == 2
        assert "config error" in capsys.readouterr().err
