"""Side-by-side comparisons against the published values.

Each table returns (rows, ok) where rows carry (label, ours, published,
tolerance, pass/fail or 'target').  Rows marked 'target' are calibration
comparisons under a documented convention, not assertions.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .models import hjb_folds
from .photonic.cost import FOOTPRINT_TABLE, footprint, latency
from .photonic.counting import dense_mzi_count, tt_mzi_count
from .quadrature import build_sparse_grid
from .tensortrain import TTLayout, tt_param_count

__all__ = ["reproduce_table", "TABLE_IDS"]

TABLE_IDS = ("cost", "sparse-grid-counts", "params", "mzi", "table2-bs")


def _row(label, ours, published, tol):
    status = "pass" if abs(ours - published) <= tol else "FAIL"
    return (label, ours, published, tol, status)


def _target_row(label, ours, published):
    return (label, ours, published, None, "target")


def reproduce_table(table: str, run_dir: str | None = None):
    if table == "cost":
        return _cost_table()
    if table == "sparse-grid-counts":
        return _grid_table()
    if table == "params":
        return _params_table()
    if table == "mzi":
        return _mzi_table()
    if table == "table2-bs":
        return _bs_table(run_dir)
    raise KeyError(f"unknown table {table!r}; choose from {TABLE_IDS}")


def _cost_table():
    rows = []
    published = {
        "ONN-SM": (51.30, 0.174, 1.74),
        "TONN-SM": (48.74, 0.164, 1.64),
        "TONN-TM": (289.86, 0.980, 9.80),
    }
    for arch, (p_inf, p_epoch, p_total) in published.items():
        got = latency(arch=arch)
        rows.append(_row(f"{arch} t_inference [ns]", got["t_inference_ns"], p_inf, 0.01))
        # the printed TONN-SM epoch/total round differently from the stated
        # formula (computed 0.1652 ms / 1.652 s); allow 1% there
        tol_e = max(0.01, 0.01 * p_epoch) if arch == "TONN-SM" else 0.01
        tol_t = max(0.01, 0.01 * p_total) if arch == "TONN-SM" else 0.01
        rows.append(_row(f"{arch} t_epoch [ms]", got["t_epoch_ms"], p_epoch, tol_e))
        rows.append(_row(f"{arch} t_total [s]", got["t_total_s"], p_total, tol_t))
    rows.append(_target_row("ONN-TM t_total [s]", latency(arch="ONN-TM")["t_total_s"] , 52.27))
    for arch, p_total in (("ONN-SM", 3975.68), ("TONN-SM", 102.72), ("ONN-TM", 18.72), ("TONN-TM", 18.72)):
        rows.append(_row(f"{arch} footprint [mm^2]", footprint(arch)["total"], p_total, 0.01))
    ok = all(r[-1] != "FAIL" for r in rows)
    return rows, ok


def _grid_table():
    rows = []
    for dim, published in ((2, 13), (3, 25), (21, 925)):
        rows.append(_row(f"grid nodes D={dim} k=3", len(build_sparse_grid(dim, 3)), published, 0))
    ok = all(r[-1] != "FAIL" for r in rows)
    return rows, ok


def _bs_model_params(tensorized: bool) -> int:
    dense_in = 2 * 128 + 128
    dense_out = 128 + 1
    if tensorized:
        hidden = tt_param_count(TTLayout((4, 4, 8), (8, 4, 4), (1, 2, 2, 1))) + 128
    else:
        hidden = 128 * 128 + 128
    return dense_in + hidden + dense_out


def _hjb_model_params(rank: int | None) -> int:
    if rank is None:
        return (21 * 512 + 512) + (512 * 512 + 512) + (512 + 1)
    (in_f, in_o), (h_f, h_o) = hjb_folds(512)
    rk = lambda L: (1,) + (rank,) * (L - 1) + (1,)
    return (
        tt_param_count(TTLayout(in_f, in_o, rk(4)))
        + 512
        + tt_param_count(TTLayout(h_f, h_o, rk(4)))
        + 512
        + (512 + 1)
    )


def _burgers_model_params(tensorized: bool) -> int:
    dense = (2 * 100 + 100) + (100 + 1)
    if tensorized:
        return dense + 3 * (tt_param_count(TTLayout((4, 5, 5), (5, 5, 4), (1, 2, 2, 1))) + 100)
    return dense + 3 * (100 * 100 + 100)


def _params_table():
    rows = [
        _row("512x512 TT variables", tt_param_count(TTLayout((4, 4, 4, 8), (8, 4, 4, 4), (1, 2, 2, 2, 1))), 256, 0),
        _row("HJB standard params", _hjb_model_params(None), 274_433, 0),
        _row("HJB TT params (rank 2)", _hjb_model_params(2), 1_929, 0),
        _row("HJB compression ratio", round(_hjb_model_params(None) / _hjb_model_params(2), 2), 142.27, 0),
        _row("BS compression ratio", round(_bs_model_params(False) / _bs_model_params(True), 2), 20.44, 0),
        _row(
            "Burgers/Darcy compression ratio",
            round(_burgers_model_params(False) / _burgers_model_params(True), 2),
            24.74,
            0,
        ),
        _row("Burgers/Darcy standard params", _burgers_model_params(False), 30_701, 0),
        _row("Burgers/Darcy TT params", _burgers_model_params(True), 1_241, 0),
    ]
    for rank, published in ((4, 2_705), (6, 3_865), (8, 5_409)):
        rows.append(_row(f"HJB TT params (rank {rank})", _hjb_model_params(rank), published, 0))
    for width, published in ((256, 71_681), (128, 19_457), (64, 5_633), (32, 1_793)):
        p = (21 * width + width) + (width * width + width) + (width + 1)
        rows.append(_row(f"HJB standard params (width {width})", p, published, 0))
    ok = all(r[-1] != "FAIL" for r in rows)
    return rows, ok


def _mzi_table():
    rows = [
        _row("dense 128x128 (any blocking)", dense_mzi_count(128, 128, 8), 16_384, 0),
        _row("dense 64x64", dense_mzi_count(64, 64, 8), 4_096, 0),
        _row(
            "BS TT hidden (8-wavelength replication)",
            tt_mzi_count(TTLayout((4, 4, 8), (8, 4, 4), (1, 2, 2, 1)), wavelengths=8),
            384,
            0,
        ),
    ]
    # whole-model published counts: convention for the dense input/output
    # layers is not recoverable; report the tensorized-layer totals we derive
    (in_f, in_o), (h_f, h_o) = hjb_folds(512)
    hjb_tt = tt_mzi_count(TTLayout(in_f, in_o, (1, 2, 2, 2, 1)), wavelengths=8) + tt_mzi_count(
        TTLayout(h_f, h_o, (1, 2, 2, 2, 1)), wavelengths=8
    )
    burgers_tt = 3 * tt_mzi_count(TTLayout((4, 5, 5), (5, 5, 4), (1, 2, 2, 1)), wavelengths=8)
    rows.append(_target_row("BS whole model (TT layers only)", 384, 1_685))
    rows.append(_target_row("HJB whole model (TT layers only)", hjb_tt, 2_057))
    rows.append(_target_row("Burgers/Darcy whole model (TT layers only)", burgers_tt, 2_516))
    ok = all(r[-1] != "FAIL" for r in rows)
    return rows, ok


def _bs_table(run_dir: str | None):
    """Compare completed Black-Scholes runs against the published errors."""
    if run_dir is None:
        raise FileNotFoundError("table2-bs needs --run-dir pointing at completed runs")
    missing = []
    values = {}
    for variant in ("tt", "standard"):
        path = Path(run_dir) / f"bs_zo_{variant}" / "black-scholes" / "report.txt"
        if not path.exists():
            missing.append(str(path))
            continue
        for line in path.read_text().splitlines():
            if line.startswith("mean rel_l2"):
                values[variant] = float(line.split()[2])
    if missing:
        raise FileNotFoundError("missing runs: " + ", ".join(missing))
    rows = [
        ("ZO-TT mean rel_l2 (<= 1.2e-1)", values["tt"], 0.083, 0.037,
         "pass" if values["tt"] <= 0.12 else "FAIL"),
        _target_row("ZO-standard mean rel_l2", values["standard"], 0.391),
        ("ZO-TT < ZO-standard", values["tt"], values["standard"], None,
         "pass" if values["tt"] < values["standard"] else "FAIL"),
    ]
    ok = all(r[-1] != "FAIL" for r in rows)
    return rows, ok


def format_table(rows) -> str:
    lines = ["label,ours,published,tolerance,status"]
    for label, ours, published, tol, status in rows:
        tol_s = "" if tol is None else f"{tol}"
        lines.append(f"{label},{ours},{published},{tol_s},{status}")
    return "\n".join(lines)
