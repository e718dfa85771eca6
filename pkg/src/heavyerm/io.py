"""CSV readers and writers. Every file starts with a ``# schema=1`` line.

Floats are written with ``repr`` so a write/read round trip is bit-exact.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from heavyerm.dgp import DgpSpec, Sample

SCHEMA = "# schema=1"


class SchemaError(ValueError):
    pass


def _open_write(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = open(path, "w", newline="")
    fh.write(SCHEMA + "\n")
    return fh


def _read_rows(path, header: list[str] | None = None) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\r\n")
        if first != SCHEMA:
            raise SchemaError(f"{path}: expected {SCHEMA!r} on the first line, got {first!r}")
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: missing header") from None
        if header is not None and got != header:
            raise SchemaError(f"{path}: header {got} != {header}")
        return got, [row for row in reader if row]


def _f(x) -> str:
    return repr(float(x))


def write_rows(path, header, rows) -> None:
    with _open_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_f(v) if isinstance(v, (float, np.floating)) else v for v in row])


# -- samples ------------------------------------------------------------------

def write_sample(path, sample: Sample) -> None:
    header = ["t"] + [f"x{j + 1}" for j in range(sample.spec.d)] + ["y"]
    rows = ([t] + [float(v) for v in sample.x[t]] + [float(sample.y[t])] for t in range(sample.n))
    write_rows(path, header, rows)


def read_sample_arrays(path) -> tuple[np.ndarray, np.ndarray]:
    header, rows = _read_rows(path)
    if len(header) < 3 or header[0] != "t" or header[-1] != "y":
        raise SchemaError(f"{path}: header must be t,x1..xd,y")
    data = np.array([[float(v) for v in row[1:]] for row in rows], dtype=float).reshape(len(rows), len(header) - 1)
    return np.ascontiguousarray(data[:, :-1]), np.ascontiguousarray(data[:, -1])


def read_sample(path, spec: DgpSpec, seed: int = 0) -> Sample:
    x, y = read_sample_arrays(path)
    return Sample(x=x, y=y, spec=spec, seed=seed, n=x.shape[0])


# -- fits, rates, summaries ---------------------------------------------------

def fit_header(d: int) -> list[str]:
    return ["seed", "n", "loss", "R", "objective", "iterations", "final_gap"] + [f"theta_{j + 1}" for j in range(d)]


def write_fit(path, seed, n, loss_name, R, fit) -> None:
    row = [seed, n, loss_name, float(R), float(fit.objective), fit.iterations, float(fit.final_gap)]
    row += [float(v) for v in fit.theta_hat]
    write_rows(path, fit_header(len(fit.theta_hat)), [row])


RATES_HEADER = ["n", "rep", "seed", "error", "objective", "iterations"]
SUMMARY_HEADER = ["n", "mean", "median", "q95", "stderr"]
CONC_HEADER = ["t", "empirical", "std_error", "bound"]
ESTIMATES_HEADER = ["measure", "param_json", "value", "std_error", "n_mc", "seed"]


def write_rates(path, rows) -> None:
    write_rows(path, RATES_HEADER,
               ([r.n, r.rep, r.seed, float(r.error), float(r.objective), r.iterations] for r in rows))


def write_summary(path, per_n) -> None:
    write_rows(path, SUMMARY_HEADER,
               ([r.n, float(r.mean), float(r.median), float(r.q95), float(r.stderr)] for r in per_n))


def read_table(path, header=None) -> dict[str, np.ndarray]:
    """Numeric CSV as a column dict."""
    got, rows = _read_rows(path, header)
    cols = list(zip(*rows)) if rows else [[] for _ in got]
    return {h: np.array([float(v) for v in c]) for h, c in zip(got, cols)}


def write_tail_report(path, report) -> Path:
    """Write the tail CSV plus a ``<stem>.params`` key=value sidecar; returns the sidecar path."""
    write_rows(path, CONC_HEADER,
               ([float(t), float(e), float(s), float(b)] for t, e, s, b in
                zip(report.t_grid, report.empirical, report.std_error, report.bound)))
    side = Path(path).with_suffix(".params")
    lines = [f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}" for k, v in report.params.items()]
    lines += [f"n_mc = {report.n_mc}", f"w_mean = {report.w_mean!r}", f"w_mean_se = {report.w_mean_se!r}"]
    side.write_text("\n".join(lines) + "\n")
    return side


def write_estimates(path, records) -> None:
    """``records``: iterables of ``(measure, params_dict, value, std_error, n_mc, seed)``."""
    write_rows(path, ESTIMATES_HEADER,
               ([m, json.dumps(p, sort_keys=True), float(v), float(s), n, seed] for m, p, v, s, n, seed in records))
