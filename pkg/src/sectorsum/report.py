"""Result rows and deterministic CSV emission.

Every run writes a two-line comment header: the first line carries suite,
seed, config hash, and tolerance scale and is part of the determinism
contract; the second carries the timestamp and is explicitly excluded
from byte-for-byte comparisons.  Floats are rendered with repr, which is
the shortest round-trip form and stable across runs.
"""

import dataclasses
import datetime
import hashlib
import json
import math

import numpy as np

__all__ = [
    "ResultRow", "config_hash", "format_value", "render_rows",
    "write_rows_csv", "render_table", "write_table_csv", "strip_timestamp",
]

ROW_COLUMNS = ("suite", "case", "metric", "value_re", "value_im",
               "tolerance", "passed", "provenance")

PROVENANCE_TAGS = ("paper_table", "trivial", "derived_oracle")


@dataclasses.dataclass
class ResultRow:
    suite: str
    case: str
    metric: str
    value: complex
    tolerance: float
    passed: bool
    provenance: str = "derived_oracle"

    def __post_init__(self):
        if self.provenance not in PROVENANCE_TAGS:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def csv_fields(self):
        v = complex(self.value)
        return (self.suite, self.case, self.metric,
                format_value(v.real), format_value(v.imag),
                format_value(self.tolerance),
                "pass" if self.passed else "FAIL", self.provenance)


def config_hash(cfg: dict) -> str:
    """First 16 hex digits of the sha256 of the canonical config JSON."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"),
                      default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return repr(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _header(suite: str, seed: int, cfg_hash: str, tol_scale: float,
            stamp: bool):
    lines = [f"# sectorsum suite={suite} seed={seed} "
             f"config_sha256={cfg_hash} tol_scale={format_value(tol_scale)}"]
    if stamp:
        now = datetime.datetime.now(datetime.timezone.utc)
        lines.append(f"# timestamp={now.isoformat()}")
    return lines


def render_rows(rows, suite: str, seed: int, cfg_hash: str,
                tol_scale: float = 1.0, stamp: bool = True) -> str:
    lines = _header(suite, seed, cfg_hash, tol_scale, stamp)
    lines.append(",".join(ROW_COLUMNS))
    for r in rows:
        lines.append(",".join(r.csv_fields()))
    return "\n".join(lines) + "\n"


def write_rows_csv(path, rows, suite: str, seed: int, cfg_hash: str,
                   tol_scale: float = 1.0, stamp: bool = True):
    text = render_rows(rows, suite, seed, cfg_hash, tol_scale, stamp)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def render_table(columns, records, suite: str, seed: int, cfg_hash: str,
                 tol_scale: float = 1.0, stamp: bool = True) -> str:
    """Module-specific tables (opsum, lpnorm, ...) with fixed columns."""
    lines = _header(suite, seed, cfg_hash, tol_scale, stamp)
    lines.append(",".join(columns))
    for rec in records:
        lines.append(",".join(
            rec[c] if isinstance(rec[c], str) else format_value(rec[c])
            for c in columns))
    return "\n".join(lines) + "\n"


def write_table_csv(path, columns, records, suite: str, seed: int,
                    cfg_hash: str, tol_scale: float = 1.0,
                    stamp: bool = True):
    text = render_table(columns, records, suite, seed, cfg_hash, tol_scale,
                        stamp)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def strip_timestamp(text: str) -> str:
    """Drop the timestamp header line; the rest is the determinism body."""
    return "\n".join(ln for ln in text.splitlines()
                     if not ln.startswith("# timestamp=")) + "\n"
