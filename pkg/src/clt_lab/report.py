"""Experiment orchestration and report emission."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .config import ExperimentConfig
from .diagnostics import RowDiagnostics, lindeberg_sum_unclipped, row_diagnostics
from .exact import (
    ExactEngineError,
    NormalizedPmf,
    SupportCapExceeded,
    convolve_row,
    write_pmf_csv,
)
from .gaussfit import STANDARD, Evidence, FitError, FitResult, Verdict, classify, fit_sigma2
from .montecarlo import RNG_ALGORITHM, SampleBatch, empirical_ks, sample_sums, worker_count, write_samples_csv
from .schemes import RowMeta, SchemeError, row_meta

THRESHOLD_NOTE = ("verdict thresholds are artifact defaults (no convergence rates are "
                  "available to derive them); see config.verdict")


class EngineFailure(RuntimeError):
    """An engine error, annotated with the scheme and row that triggered it."""


@dataclass
class RowResult:
    n: int
    meta: RowMeta
    diagnostics: RowDiagnostics
    mode: str
    law: NormalizedPmf | SampleBatch
    law_summary: dict
    ks_standard: float
    dkw_band: float | None
    fit: FitResult | None
    fit_error: str | None = None
    seconds: float = 0.0
    mode_note: str | None = None

    def evidence(self, eps_min: float, C_max: float) -> Evidence:
        return Evidence(
            n=self.n,
            neg_joint=self.diagnostics.neg_joint[eps_min],
            lindeberg=self.diagnostics.lindeberg[eps_min],
            ui_tail=self.diagnostics.ui_tail[C_max],
            ks_standard=self.ks_standard,
            ks_at_fit=None if self.fit is None else self.fit.ks_at_fit,
            sigma2_hat=None if self.fit is None else self.fit.sigma2,
            dkw_band=self.dkw_band,
        )


@dataclass
class Report:
    config: ExperimentConfig
    scheme_name: str
    rows: list
    verdict: Verdict
    timings: dict = field(default_factory=dict)

    def row(self, n: int) -> RowResult:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def as_dict(self) -> dict:
        cfg = self.config
        clamped = math.fsum(r.law_summary.get("clamped_mass", 0.0) for r in self.rows)
        return {
            "artifact": {"name": "clt-lab", "version": __version__},
            "rng_algorithm": RNG_ALGORITHM,
            "config": cfg.echo(),
            "scheme": self.scheme_name,
            "rows": [_row_dict(r, cfg) for r in self.rows],
            "verdict": {
                "tag": self.verdict.tag,
                "sigma2_hat": self.verdict.sigma2_hat,
                "reason": self.verdict.reason,
                "thresholds": asdict(cfg.verdict),
                "note": THRESHOLD_NOTE,
                "evidence": [asdict(e) for e in self.verdict.evidence],
            },
            "audit": {"clamped_mass_total": clamped,
                      "modes": {str(r.n): r.mode for r in self.rows}},
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, allow_nan=False) + "\n"

    def csv_rows(self) -> list[tuple]:
        out = []
        for r in self.rows:
            d = _row_dict(r, self.config)
            for metric in SCALAR_METRICS:
                v = _scalar(d, metric)
                if v is not None:
                    out.append((self.scheme_name, r.n, "", metric, v))
            for cell in d["eps"]:
                for metric in EPS_METRICS:
                    out.append((self.scheme_name, r.n, cell["eps"], metric, _flat(cell, metric)))
            for cell in d["C"]:
                out.append((self.scheme_name, r.n, cell["C"], "ui_tail", cell["ui_tail"]))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scheme", "n", "eps_or_C", "metric", "value"])
        for row in self.csv_rows():
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()


SCALAR_METRICS = ("k_n", "DS_n", "ks_standard", "dkw_band", "fit.sigma2", "fit.ks_at_fit",
                  "law.second_moment", "law.total_mass", "law.clamped_mass")
EPS_METRICS = ("lindeberg", "lindeberg_ge", "neg_individual_min", "neg_individual_max",
               "neg_joint", "sum_tail_probs", "chebyshev.lhs", "chebyshev.mid",
               "chebyshev.rhs", "chebyshev.rhs_strict")


def _flat(d: dict, dotted: str):
    for part in dotted.split("."):
        if d is None:
            return None
        d = d.get(part)
    return d


def _scalar(d: dict, metric: str):
    v = _flat(d, metric)
    return v if isinstance(v, (int, float)) and not isinstance(v, bool) else None


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _row_dict(r: RowResult, cfg: ExperimentConfig) -> dict:
    diag = r.diagnostics
    eps_cells = []
    for eps in cfg.eps_grid:
        ch = diag.chebyshev[eps]
        eps_cells.append({
            "eps": eps,
            "lindeberg": diag.lindeberg[eps],
            "lindeberg_ge": lindeberg_sum_unclipped(r.meta, eps, ">="),
            "neg_individual_min": diag.neg_individual[eps],
            "neg_individual_max": diag.neg_individual_max[eps],
            "neg_joint": diag.neg_joint[eps],
            "sum_tail_probs": diag.sum_tail_probs[eps],
            "chebyshev": {"lhs": ch.lhs, "mid": ch.mid, "rhs": ch.rhs,
                          "rhs_strict": ch.rhs_strict, "holds": ch.holds()},
        })
    fit = None
    if r.fit is not None:
        fit = {"sigma2": r.fit.sigma2, "ks_at_fit": r.fit.ks_at_fit,
               "sigma2_seed": r.fit.sigma2_seed, "min_grid_ks": r.fit.min_grid_ks}
    return {
        "n": r.n,
        "k_n": r.meta.k_n,
        "DS_n": r.meta.DS_n,
        "lattice_compatible": r.meta.lattice_compatible,
        "lattice_step": None if r.meta.step is None else str(r.meta.step),
        "mode": r.mode,
        "mode_note": r.mode_note,
        "law": r.law_summary,
        "ks_standard": r.ks_standard,
        "dkw_band": r.dkw_band,
        "fit": fit,
        "fit_error": r.fit_error,
        "eps": eps_cells,
        "C": [{"C": C, "ui_tail": diag.ui_tail[C]} for C in cfg.C_grid],
    }


def _run_row(scheme, n: int, cfg: ExperimentConfig) -> RowResult:
    t0 = time.perf_counter()
    meta = row_meta(scheme, n)
    diag = row_diagnostics(meta, cfg.eps_grid)
    mode, note = cfg.mode, None
    if mode == "auto":
        mode = "exact" if meta.lattice_compatible else "mc"
    law = None
    if mode == "exact":
        try:
            law = convolve_row(meta, cap=cfg.support_cap)
        except SupportCapExceeded as exc:
            if cfg.mode != "auto":
                raise
            mode, note = "mc", f"exact engine declined: {exc}"
    if mode == "exact":
        summary = {
            "second_moment": law.second_moment(),
            "total_mass": law.total_mass(),
            "clamped_mass": law.clamped_mass,
            "support_size": int(law.probs.size),
        }
        ks = law.ks(STANDARD)
        band = None
    else:
        law = sample_sums(meta, reps=cfg.reps, seed=cfg.seed, threads=1, stream_key=(n,))
        m2, m4 = law.second_moment(), law.fourth_moment()
        ks, band = empirical_ks(law, STANDARD, cfg.alpha)
        summary = {
            "reps": cfg.reps,
            "seed": cfg.seed,
            "second_moment": m2,
            "fourth_moment": m4,
            "second_moment_error_bound": 5 * math.sqrt(m4 / cfg.reps),
        }
    for C in cfg.C_grid:
        diag.ui_tail[C] = law.ui_tail(C)
    fit, fit_error = None, None
    try:
        fit = fit_sigma2(law)
    except FitError as exc:
        fit_error = str(exc)
    return RowResult(n=n, meta=meta, diagnostics=diag, mode=mode, law=law, law_summary=summary,
                     ks_standard=ks, dkw_band=band, fit=fit, fit_error=fit_error,
                     seconds=time.perf_counter() - t0, mode_note=note)


def run(cfg: ExperimentConfig, threads: int | None = None) -> Report:
    """Evaluate every row of the n-grid, then classify."""
    scheme = cfg.build_scheme()

    def job(n):
        try:
            return _run_row(scheme, n, cfg)
        except (ExactEngineError, SchemeError, ValueError) as exc:
            raise EngineFailure(f"scheme {scheme.name!r}, n = {n}: {exc}") from exc

    t0 = time.perf_counter()
    nthreads = worker_count(threads)
    if nthreads == 1:
        rows = [job(n) for n in cfg.n_grid]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            rows = list(pool.map(job, cfg.n_grid))
    eps_min, C_max = cfg.eps_grid[0], cfg.C_grid[-1]
    verdict = classify([r.evidence(eps_min, C_max) for r in rows], cfg.verdict)
    timings = {"total_seconds": time.perf_counter() - t0, "threads": nthreads,
               "rows": {str(r.n): r.seconds for r in rows}}
    return Report(cfg, scheme.name, rows, verdict, timings)


def emit(report: Report, out_dir: str | Path, formats=("json", "csv")) -> list[Path]:
    """Write ``report.json`` / ``report.csv`` plus the ``timing.json`` sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        p = out / "report.json"
        p.write_text(report.to_json())
        written.append(p)
    if "csv" in formats:
        p = out / "report.csv"
        p.write_text(report.to_csv())
        written.append(p)
    cfg = report.config
    for r in report.rows:
        if cfg.dump_pmf and isinstance(r.law, NormalizedPmf):
            p = out / f"pmf_n{r.n}.csv"
            write_pmf_csv(r.law, p)
            written.append(p)
        if cfg.dump_samples and isinstance(r.law, SampleBatch):
            p = out / f"samples_n{r.n}.csv"
            write_samples_csv(r.law, p)
            written.append(p)
    p = out / "timing.json"
    p.write_text(json.dumps(report.timings, indent=2) + "\n")
    written.append(p)
    return written
