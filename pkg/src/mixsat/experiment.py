"""Monte Carlo phase-diagram estimation over (N, alpha, beta).

A sweep walks a grid of cells, generating and solving ``trials``
independent instances per cell. Reproducibility contract: the seed of
trial t in cell (N, alpha_index, beta_index) is derived from
(master seed, N, alpha_index, beta_index, t), so any execution order,
worker count, or resume point yields the same counts. Unknown verdicts
are tracked and excluded from both sides of the SAT probability, never
guessed.

Results live in an append-only CSV (one row per cell) plus a manifest
carrying the config echo and its hash; resuming verifies the hash and
skips completed cells. Everything in the store is deterministic except
the wall-time column.

GNM is the default graph model here: fixing the edge count removes
binomial noise from the crossing estimates. Use GNP when checking
formulas that assume the defining measure.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import scipy.optimize

from . import rng, theory
from .ensemble import GNM, GNP, EnsembleParams, generate_instance
from .snip import snip_core
from .solver import Status, solve

FORMAT_VERSION = 1

CSV_COLUMNS = [
    "N", "alpha", "beta", "trials", "n_sat", "n_unsat", "n_unknown",
    "mean_core_sites", "mean_wall_ms", "seed",
]


class SweepError(Exception):
    pass


class NoBracketError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    betas: tuple
    alphas: tuple
    ns: tuple
    trials: int
    seed: int
    strategy: str = "auto"
    oracle_cap: int = 14
    graph_model: str = GNM
    out: str | None = None
    resume: bool = False
    workers: int = 1

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.betas or not self.alphas or not self.ns:
            raise ValueError("betas, alphas, and ns must be non-empty")
        for b in self.betas:
            if not 0.0 <= b <= 1.0:
                raise ValueError("beta out of [0, 1]")
        if self.graph_model not in (GNP, GNM):
            raise ValueError(f"unknown graph_model {self.graph_model!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_doc(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "betas": list(self.betas),
            "alphas": list(self.alphas),
            "ns": list(self.ns),
            "trials": self.trials,
            "seed": self.seed,
            "strategy": self.strategy,
            "oracle_cap": self.oracle_cap,
            "graph_model": self.graph_model,
        }

    @classmethod
    def from_doc(cls, doc: dict, **overrides) -> "SweepConfig":
        if doc.get("format_version", FORMAT_VERSION) != FORMAT_VERSION:
            raise SweepError("version mismatch in sweep config")
        alphas = doc["alphas"]
        if isinstance(alphas, dict):
            alphas = alpha_grid(alphas["min"], alphas["max"], alphas["step"])
        cfg = cls(
            betas=tuple(float(b) for b in doc["betas"]),
            alphas=tuple(float(a) for a in alphas),
            ns=tuple(int(n) for n in doc["ns"]),
            trials=int(doc["trials"]),
            seed=int(doc["seed"]),
            strategy=str(doc.get("strategy", "auto")),
            oracle_cap=int(doc.get("oracle_cap", 14)),
            graph_model=str(doc.get("graph_model", GNM)),
        )
        return replace(cfg, **overrides) if overrides else cfg

    def content_hash(self) -> str:
        blob = json.dumps(self.to_doc(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def alpha_grid(lo: float, hi: float, step: float) -> tuple:
    n = int(round((hi - lo) / step))
    return tuple(lo + k * step for k in range(n + 1))


@dataclass(frozen=True)
class SweepRecord:
    n: int
    alpha: float
    beta: float
    trials: int
    n_sat: int
    n_unsat: int
    n_unknown: int
    mean_core_sites: float
    mean_wall_ms: float
    seed: int

    def __post_init__(self):
        if self.n_sat + self.n_unsat + self.n_unknown != self.trials:
            raise ValueError("verdict counts must add up to trials")


def trial_seed(master: int, n: int, alpha_idx: int, beta_idx: int, t: int) -> int:
    return rng.derive_seed(master, n, alpha_idx, beta_idx, t)


def cell_seed(master: int, n: int, alpha_idx: int, beta_idx: int) -> int:
    """Lineage root recorded per CSV row; trial seeds extend it by t."""
    return rng.derive_seed(master, n, alpha_idx, beta_idx)


def run_trial(n: int, alpha: float, beta: float, graph_model: str, seed: int,
              strategy: str, oracle_cap: int) -> tuple:
    """(status, core_sites, wall_ms) for one generated-and-solved instance."""
    params = EnsembleParams(
        n_qubits=n, clause_density=alpha, quantum_fraction=beta,
        graph_model=graph_model, seed=seed,
    )
    instance = generate_instance(params)
    t0 = time.perf_counter()
    report = snip_core(instance)
    if strategy == "auto":
        verdict = solve(instance, strategy="auto", oracle_cap=oracle_cap, report=report)
    else:
        verdict = solve(instance, strategy=strategy, oracle_cap=oracle_cap)
    wall_ms = (time.perf_counter() - t0) * 1e3
    return verdict.status, report.core.n_qubits, wall_ms


def _run_chunk(args) -> tuple:
    (n, alpha, beta, a_idx, b_idx, t_lo, t_hi, master, graph_model,
     strategy, oracle_cap) = args
    sat = unsat = unknown = 0
    core_sum = 0.0
    wall_sum = 0.0
    for t in range(t_lo, t_hi):
        status, core_sites, wall_ms = run_trial(
            n, alpha, beta, graph_model,
            trial_seed(master, n, a_idx, b_idx, t), strategy, oracle_cap,
        )
        if status == Status.SAT:
            sat += 1
        elif status == Status.UNSAT:
            unsat += 1
        else:
            unknown += 1
        core_sum += core_sites
        wall_sum += wall_ms
    return sat, unsat, unknown, core_sum, wall_sum


def _cells(config: SweepConfig):
    for b_idx, beta in enumerate(config.betas):
        for n in config.ns:
            for a_idx, alpha in enumerate(config.alphas):
                yield b_idx, beta, n, a_idx, alpha


def _cell_key(n: int, alpha: float, beta: float) -> tuple:
    return (int(n), f"{float(alpha):.12g}", f"{float(beta):.12g}")


def run_sweep(config: SweepConfig, progress=None):
    """Execute (or resume) a sweep; yields one SweepRecord per cell.

    With ``config.out`` set, rows are appended to the CSV as they
    complete and a manifest sidecar records the config echo and hash;
    a resumed run verifies the hash and skips cells already stored.
    """
    config.validate()
    done = set()
    writer = None
    fh = None
    if config.out:
        manifest_path = config.out + ".manifest.json"
        if config.resume and os.path.exists(config.out):
            if os.path.exists(manifest_path):
                with open(manifest_path) as mf:
                    manifest = json.load(mf)
                if manifest.get("config_hash") != config.content_hash():
                    raise SweepError(
                        "resume refused: existing store was produced by a "
                        "different configuration"
                    )
            for rec in read_records(config.out):
                done.add(_cell_key(rec.n, rec.alpha, rec.beta))
        else:
            if os.path.exists(config.out):
                raise SweepError(
                    f"output {config.out!r} exists; pass resume to continue it"
                )
            with open(config.out, "w", newline="") as out:
                csv.writer(out).writerow(CSV_COLUMNS)
        with open(manifest_path, "w") as mf:
            json.dump(
                {
                    "format_version": FORMAT_VERSION,
                    "config": config.to_doc(),
                    "config_hash": config.content_hash(),
                },
                mf, indent=1,
            )
        fh = open(config.out, "a", newline="")
        writer = csv.writer(fh)

    pool = (
        ProcessPoolExecutor(max_workers=config.workers)
        if config.workers > 1
        else None
    )
    chunk = max(1, config.trials // (4 * config.workers))
    try:
        for b_idx, beta, n, a_idx, alpha in _cells(config):
            if _cell_key(n, alpha, beta) in done:
                continue
            spans = [
                (lo, min(lo + chunk, config.trials))
                for lo in range(0, config.trials, chunk)
            ]
            args = [
                (n, alpha, beta, a_idx, b_idx, lo, hi, config.seed,
                 config.graph_model, config.strategy, config.oracle_cap)
                for lo, hi in spans
            ]
            if pool is None:
                parts = [_run_chunk(a) for a in args]
            else:
                parts = list(pool.map(_run_chunk, args))
            sat = sum(p[0] for p in parts)
            unsat = sum(p[1] for p in parts)
            unknown = sum(p[2] for p in parts)
            core_sum = sum(p[3] for p in parts)
            wall_sum = sum(p[4] for p in parts)
            record = SweepRecord(
                n=n, alpha=alpha, beta=beta, trials=config.trials,
                n_sat=sat, n_unsat=unsat, n_unknown=unknown,
                mean_core_sites=core_sum / config.trials,
                mean_wall_ms=wall_sum / config.trials,
                seed=cell_seed(config.seed, n, a_idx, b_idx),
            )
            if writer is not None:
                writer.writerow(_record_row(record))
                fh.flush()
            if progress is not None:
                progress(record)
            yield record
    finally:
        if pool is not None:
            pool.shutdown()
        if fh is not None:
            fh.close()


def _record_row(r: SweepRecord) -> list:
    return [
        r.n, f"{r.alpha:.12g}", f"{r.beta:.12g}", r.trials,
        r.n_sat, r.n_unsat, r.n_unknown,
        f"{r.mean_core_sites:.6f}", f"{r.mean_wall_ms:.3f}", r.seed,
    ]


def read_records(path_or_file) -> list:
    if hasattr(path_or_file, "read"):
        rows = list(csv.DictReader(path_or_file))
    else:
        with open(path_or_file, newline="") as fh:
            rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        out.append(
            SweepRecord(
                n=int(row["N"]), alpha=float(row["alpha"]), beta=float(row["beta"]),
                trials=int(row["trials"]), n_sat=int(row["n_sat"]),
                n_unsat=int(row["n_unsat"]), n_unknown=int(row["n_unknown"]),
                mean_core_sites=float(row["mean_core_sites"]),
                mean_wall_ms=float(row["mean_wall_ms"]), seed=int(row["seed"]),
            )
        )
    return out


def records_to_csv_text(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(_record_row(r))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# estimation

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class PSatEstimate:
    alpha: float
    n_decided: int
    p_hat: float
    lower: float
    upper: float
    unknown_fraction: float
    flagged: bool  # unknown fraction at or above 5%


def wilson_interval(successes: int, n: int, z: float = _Z95) -> tuple:
    """95% score interval for a binomial proportion."""
    if n == 0:
        raise ValueError("empty cell")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == n else min(1.0, center + half)
    return lo, hi


def estimate_p_sat(records) -> list:
    """Per-alpha SAT probability with Wilson bounds for one (N, beta).

    Unknown verdicts never count toward either side: the estimate is
    n_sat / (trials - n_unknown), and cells with >= 5% unknowns are
    flagged rather than silently trusted.
    """
    if not records:
        raise ValueError("empty record set")
    keys = {(r.n, r.beta) for r in records}
    if len(keys) != 1:
        raise ValueError(f"records span multiple (N, beta) cells: {sorted(keys)}")
    out = []
    for r in sorted(records, key=lambda r: r.alpha):
        decided = r.trials - r.n_unknown
        if decided == 0:
            raise ValueError(f"cell alpha={r.alpha} has no decided trials")
        p = r.n_sat / decided
        lo, hi = wilson_interval(r.n_sat, decided)
        unk = r.n_unknown / r.trials
        out.append(
            PSatEstimate(
                alpha=r.alpha, n_decided=decided, p_hat=p, lower=lo, upper=hi,
                unknown_fraction=unk, flagged=unk >= 0.05,
            )
        )
    return out


@dataclass(frozen=True)
class CrossingEstimate:
    alpha_half: float
    stderr: float
    width: float
    n_points: int


def find_crossing(estimates) -> CrossingEstimate:
    """Alpha at P_SAT = 1/2 from a monotone-decreasing logistic fit.

    Requires the estimates to bracket 1/2 and refuses to extrapolate
    beyond the sampled alpha range.
    """
    ests = sorted(estimates, key=lambda e: e.alpha)
    if len(ests) < 3:
        raise ValueError("need at least three alpha points")
    ps = np.array([e.p_hat for e in ests])
    alphas = np.array([e.alpha for e in ests])
    if ps.min() >= 0.5 or ps.max() <= 0.5:
        raise NoBracketError("no bracket: estimates do not straddle 1/2")

    # starting midpoint: first sign change of p - 1/2
    k = int(np.argmax(ps < 0.5)) if ps[0] >= 0.5 else 0
    k = max(1, k)
    x0, x1 = alphas[k - 1], alphas[k]
    p0, p1 = ps[k - 1], ps[k]
    m0 = x0 + (p0 - 0.5) * (x1 - x0) / max(p0 - p1, 1e-9)
    span = alphas[-1] - alphas[0]
    sigma = np.array([max((e.upper - e.lower) / 2.0, 0.01) for e in ests])

    def logistic(a, m, w):
        return 1.0 / (1.0 + np.exp((a - m) / w))

    popt, pcov = scipy.optimize.curve_fit(
        logistic, alphas, ps, p0=[m0, span / 6.0], sigma=sigma,
        absolute_sigma=True, bounds=([alphas[0] - span, 1e-4], [alphas[-1] + span, 10 * span]),
        maxfev=10000,
    )
    m, w = popt
    if not alphas[0] <= m <= alphas[-1]:
        raise NoBracketError(
            f"fitted crossing {m:.4f} lies outside the sampled range "
            f"[{alphas[0]:.4f}, {alphas[-1]:.4f}]"
        )
    return CrossingEstimate(
        alpha_half=float(m), stderr=float(np.sqrt(pcov[0, 0])),
        width=float(w), n_points=len(ests),
    )


# ---------------------------------------------------------------------------
# finite-size scaling collapse


@dataclass(frozen=True)
class CollapseResult:
    exponent: float
    objective: float
    points: tuple  # (x, p_sat, N) triples of the rescaled raw estimates
    grid: tuple
    curves: dict   # N -> interpolated P_SAT on the common grid


def scaling_collapse(records, beta: float, exponent: float,
                     alpha_c: float | None = None, n_grid: int = 41) -> CollapseResult:
    """Rescale alpha to x = (alpha - alpha_c) * N**exponent and measure
    how well the P_SAT curves for different N collapse.

    The default positive exponent is the transition-window reading
    (window width ~ N^-exponent); pass a negative exponent to test the
    literal x = (alpha - alpha_c) / N^|exponent| form instead. The
    objective is the across-N variance of the interpolated curves,
    averaged over the common grid (0 for a perfect collapse).
    """
    recs = [r for r in records if abs(r.beta - beta) < 1e-12]
    by_n: dict = {}
    for r in recs:
        by_n.setdefault(r.n, []).append(r)
    if len(by_n) < 3:
        raise ValueError("need records for at least three values of N")
    if alpha_c is None:
        alpha_c = theory.alpha_critical(beta)

    points = []
    curves_raw = {}
    for n, cell_records in sorted(by_n.items()):
        ests = estimate_p_sat(cell_records)
        x = np.array([(e.alpha - alpha_c) * n**exponent for e in ests])
        p = np.array([e.p_hat for e in ests])
        order = np.argsort(x)
        curves_raw[n] = (x[order], p[order])
        points.extend((float(xv), float(pv), n) for xv, pv in zip(x, p))

    lo = max(xs[0] for xs, _ in curves_raw.values())
    hi = min(xs[-1] for xs, _ in curves_raw.values())
    if not hi > lo:
        raise ValueError("rescaled curves share no overlapping x range")
    grid = np.linspace(lo, hi, n_grid)
    interp = {n: np.interp(grid, xs, ps) for n, (xs, ps) in curves_raw.items()}
    stack = np.vstack([interp[n] for n in sorted(interp)])
    objective = float(np.mean(np.var(stack, axis=0)))
    return CollapseResult(
        exponent=float(exponent), objective=objective,
        points=tuple(points), grid=tuple(float(g) for g in grid),
        curves={n: tuple(float(v) for v in interp[n]) for n in interp},
    )


def scan_exponents(records, beta: float, exponents,
                   alpha_c: float | None = None) -> dict:
    return {
        float(e): scaling_collapse(records, beta, e, alpha_c=alpha_c).objective
        for e in exponents
    }
