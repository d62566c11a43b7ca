import io
import json
import math

import pytest

from su11dpso.params import InterferometerParams as P
from su11dpso.sweep import SweepSpec, columns_for, evaluate_row, run_sweep, write_rows


def test_spec_validation():
    base = P()
    for kw in ({"variable": "gamma"}, {"n": 1}, {"lo": 1.0, "hi": 0.0}, {"quantity": "fidelity"},
               {"modes": ("lpso",)}, {"pin_t": 1.5}, {"fixed": frozenset({"phi"})}):
        args = {"variable": "phi", "lo": 0.0, "hi": 1.0, "n": 3, "base": base, **kw}
        with pytest.raises(ValueError):
            SweepSpec(**args)


def test_t_points_set_both_weights():
    spec = SweepSpec("t", 0.0, 1.0, 5, P(m=2))
    p = spec.params_at(0.25)
    assert (p.s, p.t) == (0.75, 0.25)


def test_degenerate_row():
    row = evaluate_row(P(m=1, alpha=0.0, g=0.0), "mode_a", "limits", v=3)
    assert row["status"] == "degenerate"
    assert math.isnan(row["delta_phi"]) and math.isnan(row["N"]) and row["v"] == 3


def test_standard_mode_ignores_orders():
    spec = SweepSpec("g", 0.5, 1.0, 2, P(), modes=("standard", "mode_b"), ms=(1, 3))
    got = [(r["point"], r["mode"], r["m"]) for r in run_sweep(spec)]
    assert got == [(0, "standard", 0), (0, "mode_b", 1), (0, "mode_b", 3),
                   (1, "standard", 0), (1, "mode_b", 1), (1, "mode_b", 3)]


def test_writers():
    rows = [{"point": 0, "delta_phi": math.inf, "t_optimized": True, "mode": "dpso"}]
    cols = columns_for("sensitivity")
    fh = io.StringIO()
    assert write_rows(rows, cols, fh, "csv") == 1
    header, line = fh.getvalue().splitlines()
    assert header.split(",") == cols and ",inf," in line and "true" in line
    fh = io.StringIO()
    write_rows(rows, cols, fh, "jsonl")
    assert json.loads(fh.getvalue())["delta_phi"] == "inf"
    with pytest.raises(ValueError):
        write_rows(rows, cols, io.StringIO(), "xml")
