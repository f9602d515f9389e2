"""Deterministic text emitters for every result type.

All emitters are pure functions from values to strings: identical inputs
produce byte-identical output, floats are rendered with %.17g (enough
digits to round-trip a double), and JSON keys are sorted.  Nothing here
touches wall-clock time; run metadata with timestamps belongs in a
separate file (the CLI writes one).  write_text is the single place that
touches the filesystem, atomically via rename.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .analysis import EstimateReport
from .continuation import ContinuationTrace
from .grids import Field
from .radial import BifurcationScan, RadialProfile
from .solver import SolveReport
from .stability import SpectralReport


def fmt(x: float) -> str:
    """%.17g with a stable spelling for the non-finite values."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return fmt(f) if (math.isinf(f) or math.isnan(f)) else f
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def to_json(payload: dict) -> str:
    """Canonical JSON: sorted keys, no trailing whitespace, newline at end."""
    return json.dumps(_json_safe(payload), sort_keys=True, indent=2) + "\n"


def write_text(path: str, text: str) -> None:
    """Atomic write: the file either has the old content or the new."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def field_to_csv(field: Field) -> str:
    """One row per node: coordinates..., value.  Grid header as comments."""
    grid = field.grid
    lines = [f"# {ln}" for ln in grid.header().splitlines()]
    d = grid.nodes.shape[1]
    coord_names = ["r"] if grid.kind == "radial" else [f"x{i}" for i in range(d)]
    lines.append(",".join(coord_names + ["value"]))
    for row, val in zip(grid.nodes, field.values):
        lines.append(",".join(fmt(c) for c in row) + "," + fmt(val))
    return "\n".join(lines) + "\n"


def profile_to_csv(profile: RadialProfile) -> str:
    lines = [
        f"# n={profile.n}",
        f"# m={fmt(profile.m)}",
        f"# eps={fmt(profile.eps)}",
        f"# tol={fmt(profile.tol)}",
        f"# method={profile.method}",
        "r,u,du",
    ]
    for r, u, du in zip(profile.r, profile.u, profile.du):
        lines.append(f"{fmt(r)},{fmt(u)},{fmt(du)}")
    return "\n".join(lines) + "\n"


def scan_to_csv(scan: BifurcationScan) -> str:
    lines = ["eps,S"]
    for e, s in zip(scan.eps, scan.S):
        lines.append(f"{fmt(e)},{fmt(s)}")
    return "\n".join(lines) + "\n"


def scan_summary(scan: BifurcationScan) -> str:
    """Structured-text scan summary: one key=value per line."""
    lines = [
        f"n={scan.n}",
        f"m={fmt(scan.m)}",
        f"C1={fmt(scan.C1)}",
        f"C1_eps={fmt(scan.C1_eps)}",
        f"C2={fmt(scan.C2)}",
        f"C2_eps={fmt(scan.C2_eps)}",
        f"window={fmt(scan.eps[0])},{fmt(scan.eps[-1])}",
        f"samples={len(scan.eps)}",
    ]
    for note in scan.notes:
        lines.append(f"note={note}")
    return "\n".join(lines) + "\n"


def _boundary_summary(field: Field) -> dict:
    tr = field.boundary_values()
    return {"min": float(np.min(tr)), "max": float(np.max(tr))}


def solve_report_json(report: SolveReport) -> str:
    grid = report.field.grid
    return to_json(
        {
            "converged": report.converged,
            "status": report.status,
            "iterations": report.iterations,
            "residual": report.residual,
            "min_u": report.min_u,
            "tol": report.tol,
            "alpha": report.alpha,
            "h": grid.h,
            "n": grid.n,
            "kind": grid.kind,
            "boundary_summary": _boundary_summary(report.field),
            "notes": list(report.notes),
        }
    )


def spectral_report_json(report: SpectralReport) -> str:
    grid = report.eigenvector.grid
    return to_json(
        {
            "lambda_min": report.lambda_min,
            "iters": report.iterations,
            "residual": report.residual,
            "n": grid.n,
            "h": grid.h,
            "delta": grid.r0,
        }
    )


def trace_to_csv(trace: ContinuationTrace) -> str:
    lines = ["t,boundary_level,min_u,lambda_min,iters,status"]
    for s in trace.steps:
        lam = "" if s.lambda_min is None else fmt(s.lambda_min)
        lines.append(
            f"{fmt(s.t)},{fmt(s.level)},{fmt(s.min_u)},{lam},{s.iterations},{s.status}"
        )
    return "\n".join(lines) + "\n"


def trace_summary_json(trace: ContinuationTrace) -> str:
    last = trace.last_converged
    return to_json(
        {
            "status": trace.status,
            "kind": trace.kind,
            "n": trace.n,
            "h": trace.h,
            "steps": len(trace.steps),
            "last_converged": None
            if last is None
            else {
                "t": last.t,
                "level": last.level,
                "min_u": last.min_u,
                "lambda_min": last.lambda_min,
            },
            "terminal_status": trace.steps[-1].status if trace.steps else None,
        }
    )


def estimate_report_json(report: EstimateReport) -> str:
    return to_json(
        {
            "inequality": report.inequality,
            "values": dict(report.values),
            "params": dict(report.params),
            "passed": report.passed,
            "subchecks": [[name, bool(ok)] for name, ok in report.subchecks],
            "note": report.note,
        }
    )


def estimate_rows_csv(reports) -> str:
    """One row per check: check_name, params, value, bound, pass.

    params is rendered as a semicolon-joined key=value blob in one cell so
    heterogeneous checks can share a table.
    """
    lines = ["check_name,params,value,bound,pass"]
    for rep in reports:
        blob = ";".join(
            f"{k}={fmt(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v}"
            for k, v in sorted(rep.params.items())
            if not isinstance(v, (tuple, list))
        )
        vals = rep.values
        value = next(
            (vals[k] for k in ("integral", "dimension", "annulus_mass") if k in vals),
            float("nan"),
        )
        bound = next(
            (vals[k] for k in ("bound", "annulus_mass_bound") if k in vals),
            float("nan"),
        )
        lines.append(
            f"{rep.inequality},{blob},{fmt(value)},{fmt(bound)},{str(rep.passed).lower()}"
        )
    return "\n".join(lines) + "\n"


def gnuplot_scan(scan: BifurcationScan, data_name: str) -> tuple[str, str]:
    """(script, data) for an (eps, S) scan with the C=1 reference line."""
    data_lines = ["# eps S"]
    for e, s in zip(scan.eps, scan.S):
        data_lines.append(f"{fmt(e)} {fmt(s)}")
    script = "\n".join(
        [
            "set logscale x",
            'set xlabel "eps"',
            'set ylabel "S(eps)"',
            f'set title "shooting map, n={scan.n}"',
            f'plot "{data_name}" using 1:2 with lines title "S", \\',
            '     1 with lines dashtype 2 title "C=1"',
        ]
    )
    return script + "\n", "\n".join(data_lines) + "\n"


def gnuplot_trace(trace: ContinuationTrace, data_name: str) -> tuple[str, str]:
    """(script, data) with min_u vs t and lambda_min vs t panels."""
    data_lines = ["# t min_u lambda_min"]
    for s in trace.steps:
        lam = "?" if s.lambda_min is None else fmt(s.lambda_min)
        data_lines.append(f"{fmt(s.t)} {fmt(s.min_u)} {lam}")
    script = "\n".join(
        [
            "set multiplot layout 2,1",
            'set xlabel "t"',
            'set ylabel "min u"',
            f'plot "{data_name}" using 1:2 with linespoints title "min u"',
            'set ylabel "lambda_min"',
            f'plot "{data_name}" using 1:3 with linespoints title "lambda_min", \\',
            '     0 with lines dashtype 2 notitle',
            "unset multiplot",
        ]
    )
    return script + "\n", "\n".join(data_lines) + "\n"


def gnuplot_profiles(profiles, data_name: str) -> tuple[str, str]:
    """(script, data) for a radial profile family with the cone overlaid.

    The data file holds one (r, u) block per profile, blank-line separated,
    in the order given.
    """
    blocks = []
    titles = []
    for prof in profiles:
        rows = [f"# eps={fmt(prof.eps)}"]
        for r, u in zip(prof.r, prof.u):
            rows.append(f"{fmt(r)} {fmt(u)}")
        blocks.append("\n".join(rows))
        titles.append(f"eps={fmt(prof.eps)}")
    plot_parts = [
        f'"{data_name}" index {i} using 1:2 with lines title "{t}"'
        for i, t in enumerate(titles)
    ]
    plot_parts.append('x with lines dashtype 2 title "u=r"')
    script = "\n".join(
        [
            'set xlabel "r"',
            'set ylabel "u"',
            "plot " + ", \\\n     ".join(plot_parts),
        ]
    )
    return script + "\n", "\n\n".join(blocks) + "\n"
