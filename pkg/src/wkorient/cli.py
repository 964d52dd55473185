"""Command-line drivers.

Single-instance file tools (``gen``, ``core``, ``orient``, ``stats``) operate
on the shared hypergraph format; experiment commands (``ode``, ``threshold``,
``simulate``, ``core-profile``, ``table1``) run the numeric machinery and
emit CSV or JSON.  Exit codes: 0 success (orientable), 2 decided
non-orientable, 1 anything went wrong.

Trials are reproducible from (master seed, trial index) alone: each one owns
an RNG stream keyed by its index, and results are merged by index, so the
output bytes do not depend on how many workers ran them.  Per-trial wall
times are printed to stderr rather than persisted, for the same reason.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Optional, Sequence, TextIO

import numpy as np
from scipy import stats as scipy_stats

from .flow import CutWitness, orient
from .hypergraph import (
    Hypergraph,
    Orientation,
    OrientationParams,
    read_hypergraph,
    w_density,
    write_hypergraph,
)
from .models import RngSeed, sample_uniform_multi
from .ode import CoreStats, OdeParams, find_threshold, integrate
from .peeling import core_statistics, rancore
from .poisson import TruncatedPoisson, solve_lambda

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "SimulationReport",
    "CoreProfileReport",
    "TABLE1_REFERENCE",
    "run_trial",
    "simulate_threshold",
    "core_profile",
    "table1_rows",
    "main",
]

SCHEMA_VERSION = 1

# Published reference values the `table1` command reports deltas against:
# (h, w, k) -> (threshold mean degree, core mean degree at threshold).
TABLE1_REFERENCE = (
    (3, 2, 4, 5.485, 6.65086),
    (3, 2, 10, 14.766, 15.5872),
    (3, 2, 40, 59.991, 60.0773),
    (10, 2, 4, 19.99999, 20.0003),
)


# ---------------------------------------------------------------------------
# experiment plumbing
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Validated parameters for one batch of sampled trials."""

    h: int
    w: int
    k: int
    n: int
    mu_bar: float
    trials: int
    seed: int
    check_orientability: bool = False

    def __post_init__(self) -> None:
        OrientationParams(self.h, self.w, self.k)  # reuse its validation
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.mu_bar <= 0:
            raise ValueError("mu must be positive")
        if self.trials < 1:
            raise ValueError("trials must be positive")

    @property
    def params(self) -> OrientationParams:
        return OrientationParams(self.h, self.w, self.k)

    @property
    def num_edges(self) -> int:
        return round(self.mu_bar * self.n / self.h)


@dataclasses.dataclass(frozen=True)
class TrialRecord:
    """One sampled instance: core statistics plus the orientability verdict
    (None when the trial didn't ask for one).  ``seconds`` stays out of the
    persisted tables so equal seeds give equal bytes; ``degree_counts``
    (core degree histogram, index = degree) is an aggregation aid and stays
    out of them too."""

    mu_bar: float
    trial: int
    stream: int
    n_core: int
    m_core: dict
    kappa: float
    mu_hat: float
    orientable: Optional[bool]
    seconds: float
    degree_counts: tuple = ()


def run_trial(cfg: ExperimentConfig, trial: int, stream: int) -> TrialRecord:
    """Sample, peel, and optionally flow-orient the core of one instance."""
    t0 = time.perf_counter()
    p = cfg.params
    rng = RngSeed(cfg.seed, stream).generator()
    H = sample_uniform_multi(cfg.n, cfg.num_edges, cfg.h, rng)
    pr = rancore(H, p)
    st = core_statistics(pr, p)
    core = pr.core
    if core.n:
        degree_counts = tuple(np.bincount(core.degrees()).tolist())
    else:
        degree_counts = ()
    orientable: Optional[bool] = None
    if cfg.check_orientability:
        if core.num_edges == 0:
            orientable = True
        else:
            orientable = isinstance(orient(core, p), Orientation)
    return TrialRecord(
        mu_bar=cfg.mu_bar,
        trial=trial,
        stream=stream,
        n_core=st.n_core,
        m_core=dict(st.m_vec.counts),
        kappa=float(st.kappa),
        mu_hat=st.mu_hat,
        orientable=orientable,
        seconds=time.perf_counter() - t0,
        degree_counts=degree_counts,
    )


def _worker_count() -> int:
    env = os.environ.get("WKORIENT_WORKERS", "")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_batch(cfg: ExperimentConfig, stream_base: int) -> list[TrialRecord]:
    """Run cfg.trials independent trials, merged by index."""
    jobs = [(cfg, t, stream_base + t) for t in range(cfg.trials)]
    workers = min(_worker_count(), cfg.trials)
    if workers <= 1:
        records = [run_trial(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial_star, jobs))
    for r in records:
        print(
            f"  trial {r.trial} (stream {r.stream}): core {r.n_core}, "
            f"kappa {r.kappa:.5f}, orientable {r.orientable}, {r.seconds:.1f}s",
            file=sys.stderr,
        )
    return records


def _run_trial_star(job) -> TrialRecord:
    return run_trial(*job)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_text(command: str, payload: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": command}
    doc.update(payload)
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def _json_default(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if dataclasses.is_dataclass(value):
        return dataclasses.asdict(value)
    raise TypeError(f"not JSON-serializable: {type(value)}")


def _write_text(out: Optional[str], text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _open_in(path: str) -> TextIO:
    return sys.stdin if path == "-" else open(path)


def _record_rows(records: Sequence[TrialRecord], sizes: Sequence[int]):
    header = ["mu_bar", "trial", "stream", "n_core"]
    header += [f"m_{s}" for s in sizes]
    header += ["kappa", "mu_hat", "orientable"]
    rows = []
    for r in records:
        row = [r.mu_bar, r.trial, r.stream, r.n_core]
        row += [r.m_core.get(s, 0) for s in sizes]
        row += [r.kappa, r.mu_hat, r.orientable]
        rows.append(row)
    return header, rows


def _record_dict(r: TrialRecord) -> dict:
    d = dataclasses.asdict(r)
    d.pop("seconds")
    d.pop("degree_counts")
    d["m_core"] = {str(s): c for s, c in sorted(r.m_core.items())}
    return d


def _stats_dict(stats: CoreStats) -> dict:
    return {
        "x_star": stats.x_star,
        "alpha": stats.alpha,
        "beta": {str(s): b for s, b in sorted(stats.beta.items())},
        "kappa": stats.kappa,
        "mu_hat": stats.mu_hat,
        "terminated_by": stats.terminated_by,
    }


# ---------------------------------------------------------------------------
# simulate: empirical orientability threshold
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class SimulationReport:
    params: OrientationParams
    n: int
    trials: int
    seed: int
    probes: list  # (mu_bar, fraction_orientable, wald_half_width)
    records: list
    bracket: tuple
    estimate: float
    half_width: float
    ode_threshold: Optional[float]


def _wald_half_width(fraction: float, trials: int) -> float:
    return 1.96 * math.sqrt(fraction * (1.0 - fraction) / trials)


def simulate_threshold(
    p: OrientationParams,
    n: int,
    trials: int,
    seed: int,
    tol: float = 0.05,
    bracket: Optional[tuple[float, float]] = None,
) -> SimulationReport:
    """Bisect the mean degree for the 50% orientable point.

    Each probe runs ``trials`` sampled instances (peel, then flow on the
    core).  Without an explicit bracket, one is seeded from the numeric
    threshold prediction and widened until the endpoint fractions straddle
    one half.  Bisection stops at width <= tol; the estimate is the final
    midpoint with half the bracket as its half-width (probe-level binomial
    noise is reported per probe, not folded in).
    """
    records: list[TrialRecord] = []
    probes: list[tuple[float, float, float]] = []
    probe_index = 0

    def fraction_at(mu_bar: float) -> float:
        nonlocal probe_index
        cfg = ExperimentConfig(
            p.h, p.w, p.k, n, mu_bar, trials, seed, check_orientability=True
        )
        print(f"probe mu_bar={mu_bar:.5f}", file=sys.stderr)
        batch = _run_batch(cfg, stream_base=probe_index * trials)
        probe_index += 1
        records.extend(batch)
        frac = sum(1 for r in batch if r.orientable) / trials
        probes.append((mu_bar, frac, _wald_half_width(frac, trials)))
        return frac

    ode_threshold: Optional[float] = None
    if bracket is None:
        ode_threshold = find_threshold(p, tol=1e-3).mu_tilde
        lo, hi = ode_threshold - 2 * tol, ode_threshold + 2 * tol
    else:
        lo, hi = bracket
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")

    f_lo = fraction_at(lo)
    for _ in range(4):
        if f_lo >= 0.5:
            break
        lo -= max(2 * tol, 0.05)
        f_lo = fraction_at(lo)
    f_hi = fraction_at(hi)
    for _ in range(4):
        if f_hi < 0.5:
            break
        hi += max(2 * tol, 0.05)
        f_hi = fraction_at(hi)
    if f_lo < 0.5 or f_hi >= 0.5:
        raise RuntimeError(
            f"orientable fraction does not straddle 1/2 on [{lo}, {hi}]"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fraction_at(mid) >= 0.5:
            lo = mid
        else:
            hi = mid
    return SimulationReport(
        params=p,
        n=n,
        trials=trials,
        seed=seed,
        probes=probes,
        records=records,
        bracket=(lo, hi),
        estimate=0.5 * (lo + hi),
        half_width=0.5 * (hi - lo),
        ode_threshold=ode_threshold,
    )


# ---------------------------------------------------------------------------
# core-profile: empirical core vs. the numeric prediction
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class CoreProfileReport:
    config: ExperimentConfig
    prediction: Optional[CoreStats]
    records: list
    mean_alpha: float
    mean_beta: dict
    mean_kappa: float
    mean_mu_hat: float
    deviations: dict  # variable -> relative deviation of the trial mean
    chi2_stat: Optional[float]
    chi2_pvalue: Optional[float]
    chi2_dof: Optional[int]


def _pool_degree_histogram(records: Sequence[TrialRecord]) -> np.ndarray:
    """Sum the per-trial core degree histograms (index = degree)."""
    width = max((len(r.degree_counts) for r in records), default=0)
    counts = np.zeros(width, dtype=np.int64)
    for r in records:
        if r.degree_counts:
            counts[: len(r.degree_counts)] += np.asarray(
                r.degree_counts, dtype=np.int64
            )
    return counts


def _truncated_poisson_chi2(
    counts: np.ndarray, k: int
) -> tuple[float, float, int]:
    """Chi-square of a degree histogram against the truncated Poisson whose
    rate is fitted from the histogram mean (hence one extra lost dof)."""
    total = int(counts.sum())
    degrees = np.arange(counts.size)
    mean = float((degrees * counts).sum()) / total
    lam = solve_lambda(mean, k)  # rate whose >=k+1 truncation has this mean
    dist = TruncatedPoisson(lam, k + 1)
    top = counts.size - 1
    expected = np.array(
        [dist.pmf(d) * total for d in range(k + 1, top)], dtype=float
    )
    observed = counts[k + 1 : top].astype(float)
    # final cell absorbs the whole upper tail
    tail_p = 1.0 - sum(dist.pmf(d) for d in range(k + 1, top))
    expected = np.append(expected, max(tail_p, 0.0) * total)
    observed = np.append(observed, float(counts[top:].sum()))
    # merge sparse cells from the right until every expectation is >= 5
    while expected.size > 2 and expected[-1] < 5.0:
        expected[-2] += expected[-1]
        observed[-2] += observed[-1]
        expected, observed = expected[:-1], observed[:-1]
    while expected.size > 2 and expected[0] < 5.0:
        expected[1] += expected[0]
        observed[1] += observed[0]
        expected, observed = expected[1:], observed[1:]
    expected *= observed.sum() / expected.sum()
    stat, pvalue = scipy_stats.chisquare(observed, expected, ddof=1)
    return float(stat), float(pvalue), int(expected.size - 2)


def core_profile(cfg: ExperimentConfig) -> CoreProfileReport:
    """Empirical core fractions vs. the integrated prediction, plus a
    chi-square check of the pooled core degree histogram."""
    p = cfg.params
    try:
        _, prediction = integrate(OdeParams(p, cfg.mu_bar))
    except ValueError:
        prediction = None  # start outside the domain: predicted empty core
    records = _run_batch(cfg, stream_base=0)

    sizes = list(range(p.h, p.min_edge_size - 1, -1))
    mean_alpha = float(np.mean([r.n_core / cfg.n for r in records]))
    mean_beta = {
        s: float(np.mean([r.m_core.get(s, 0) / cfg.n for r in records]))
        for s in sizes
    }
    nonempty = [r for r in records if r.n_core > 0]
    mean_kappa = float(np.mean([r.kappa for r in nonempty])) if nonempty else 0.0
    mean_mu_hat = float(np.mean([r.mu_hat for r in nonempty])) if nonempty else 0.0

    def rel(emp: float, ref: float) -> float:
        return abs(emp - ref) / max(abs(ref), 1e-12)

    if prediction is not None and not prediction.empty:
        deviations = {
            "alpha": rel(mean_alpha, prediction.alpha),
            "kappa": rel(mean_kappa, prediction.kappa),
            "mu_hat": rel(mean_mu_hat, prediction.mu_hat),
        }
        for s in sizes:
            deviations[f"beta_{s}"] = rel(mean_beta[s], prediction.beta.get(s, 0.0))
    else:
        # empty-core regime: report the absolute leftovers
        deviations = {"alpha": mean_alpha, "kappa": mean_kappa, "mu_hat": mean_mu_hat}

    chi2_stat = chi2_pvalue = None
    chi2_dof = None
    counts = _pool_degree_histogram(records)
    if counts.sum() > 0 and counts.size > cfg.k + 3:
        chi2_stat, chi2_pvalue, chi2_dof = _truncated_poisson_chi2(counts, cfg.k)

    return CoreProfileReport(
        config=cfg,
        prediction=prediction,
        records=records,
        mean_alpha=mean_alpha,
        mean_beta=mean_beta,
        mean_kappa=mean_kappa,
        mean_mu_hat=mean_mu_hat,
        deviations=deviations,
        chi2_stat=chi2_stat,
        chi2_pvalue=chi2_pvalue,
        chi2_dof=chi2_dof,
    )


# ---------------------------------------------------------------------------
# table1: threshold table with reference deltas
# ---------------------------------------------------------------------------


def table1_rows(tol: float = 1e-4) -> list[dict]:
    """Compute the four reference parameter rows; a row that fails carries
    its error text instead of aborting the table."""
    rows = []
    for h, w, k, ref_mu_tilde, ref_mu_hat in TABLE1_REFERENCE:
        row = {
            "h": h,
            "w": w,
            "k": k,
            "ref_mu_tilde": ref_mu_tilde,
            "ref_mu_hat": ref_mu_hat,
            "trivial_bound": h * k / w,
        }
        try:
            res = find_threshold(OrientationParams(h, w, k), tol=tol)
            row.update(
                mu_tilde=res.mu_tilde,
                mu_hat=res.mu_hat,
                delta_mu_tilde=res.mu_tilde - ref_mu_tilde,
                delta_mu_hat=res.mu_hat - ref_mu_hat,
                error="",
            )
        except Exception as exc:  # keep going; the table must complete
            row.update(
                mu_tilde=None,
                mu_hat=None,
                delta_mu_tilde=None,
                delta_mu_hat=None,
                error=f"{type(exc).__name__}: {exc}",
            )
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_gen(args) -> int:
    if args.m is None and args.mu is None:
        raise SystemExit("gen: need --m or --mu")
    m = args.m if args.m is not None else round(args.mu * args.n / args.h)
    rng = RngSeed(args.seed).generator()
    H = sample_uniform_multi(args.n, m, args.h, rng)
    buf = [f"# h={args.h} seed={args.seed}\n"]
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w")
    try:
        out.writelines(buf)
        write_hypergraph(H, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_core(args) -> int:
    p = OrientationParams(args.h, args.w, args.k)
    with _open_in(args.input) as fh:
        H = read_hypergraph(fh)
    pr = rancore(H, p)
    st = core_statistics(pr, p)
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w")
    try:
        out.write(
            f"# core of h={args.h} w={args.w} k={args.k}: "
            f"n_core={st.n_core} kappa={st.kappa} mu_hat={_fmt(st.mu_hat)}\n"
        )
        out.write("# vertices relabeled 0..n_core-1 in original order: ")
        out.write(" ".join(str(v) for v in pr.core_vertices) + "\n")
        write_hypergraph(pr.core, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_orient(args) -> int:
    p = OrientationParams(args.h, args.w, args.k)
    with _open_in(args.input) as fh:
        H = read_hypergraph(fh)
    result = orient(H, p)
    if isinstance(result, Orientation):
        if args.format == "json":
            text = _json_text(
                "orient",
                {
                    "orientable": True,
                    "signs": {str(i): list(s) for i, s in enumerate(result.signs)},
                },
            )
        else:
            lines = [
                f"{i}: " + " ".join(str(v) for v in s)
                for i, s in enumerate(result.signs)
            ]
            text = "\n".join(lines) + "\n"
        _write_text(args.out, text)
        return 0
    witness: CutWitness = result
    if args.format == "json":
        payload = {"orientable": False}
        if witness.degenerate_edge is not None:
            payload["degenerate_edge"] = witness.degenerate_edge
        else:
            payload["S"] = list(witness.S)
            payload["kappa_S"] = str(witness.kappa_S)
        text = _json_text("orient", payload)
    elif witness.degenerate_edge is not None:
        text = f"non-orientable\ndegenerate-edge: {witness.degenerate_edge}\n"
    else:
        text = (
            "non-orientable\n"
            "S: " + " ".join(str(v) for v in witness.S) + "\n"
            f"kappa: {witness.kappa_S}\n"
        )
    _write_text(args.out, text)
    return 2


def _cmd_stats(args) -> int:
    p = OrientationParams(args.h, args.w, max(args.k, 1))
    with _open_in(args.input) as fh:
        H = read_hypergraph(fh)
    H.validate_sizes(p)
    degrees = H.degrees()
    sizes = dict(sorted(H.edge_size_counts().items(), reverse=True))
    kappa = w_density(H, p) if H.n else Fraction(0)
    demand = sum(p.sign_demand(len(e)) for e in H.edges)
    payload = {
        "n": H.n,
        "m": H.num_edges,
        "edges_by_size": {str(s): c for s, c in sizes.items()},
        "total_demand": demand,
        "kappa": str(kappa),
        "kappa_float": float(kappa),
        "min_degree": min(degrees) if degrees else 0,
        "max_degree": max(degrees) if degrees else 0,
        "mean_degree": H.total_degree / H.n if H.n else 0.0,
    }
    if args.format == "json":
        text = _json_text("stats", payload)
    else:
        flat = dict(payload)
        flat.pop("edges_by_size")
        for s, c in sizes.items():
            flat[f"m_{s}"] = c
        header = list(flat)
        text = _csv_text(header, [[flat[c] for c in header]])
    _write_text(args.out, text)
    return 0


def _cmd_ode(args) -> int:
    p = OrientationParams(args.h, args.w, args.k)
    kwargs = {}
    if args.tol is not None:
        kwargs = {"rtol": args.tol, "atol": args.tol * 1e-2}
    params = OdeParams(p, args.mu, **kwargs)
    try:
        traj, stats = integrate(params)
    except ValueError as exc:
        # start outside the domain: an honest empty-core report
        if args.format == "json":
            text = _json_text(
                "ode",
                {
                    "h": p.h, "w": p.w, "k": p.k, "mu_bar": args.mu,
                    "stats": None,
                    "reason": str(exc),
                },
            )
        else:
            text = f"# empty core: {exc}\n"
        _write_text(args.out, text)
        return 0
    if args.format == "json":
        text = _json_text(
            "ode",
            {
                "h": p.h, "w": p.w, "k": p.k, "mu_bar": args.mu,
                "stats": _stats_dict(stats),
            },
        )
        _write_text(args.out, text)
    else:
        if args.out in (None, "-"):
            traj.to_csv(sys.stdout)
        else:
            with open(args.out, "w") as fh:
                traj.to_csv(fh)
        print(
            f"x*={stats.x_star:.9g} alpha={stats.alpha:.9g} "
            f"kappa={stats.kappa:.9g} mu_hat={stats.mu_hat:.9g} "
            f"terminated_by={stats.terminated_by}",
            file=sys.stderr,
        )
    return 0


def _cmd_threshold(args) -> int:
    p = OrientationParams(args.h, args.w, args.k)
    res = find_threshold(p, tol=args.tol if args.tol is not None else 1e-4)
    if args.format == "json":
        text = _json_text(
            "threshold",
            {
                "h": p.h, "w": p.w, "k": p.k,
                "mu_tilde": res.mu_tilde,
                "mu_hat": res.mu_hat,
                "bracket": list(res.bracket),
                "kappa_lo": res.kappa_lo,
                "kappa_hi": res.kappa_hi,
                "iterations": res.iterations,
                "stats_at_threshold": (
                    _stats_dict(res.stats_at_threshold)
                    if res.stats_at_threshold
                    else None
                ),
            },
        )
    else:
        text = _csv_text(
            ["h", "w", "k", "mu_tilde", "mu_hat"],
            [[p.h, p.w, p.k, res.mu_tilde, res.mu_hat]],
        )
    _write_text(args.out, text)
    return 0


def _cmd_simulate(args) -> int:
    p = OrientationParams(args.h, args.w, args.k)
    mus = args.mu or []
    if len(mus) == 1:
        # single-point mode: orientable fraction at one mean degree
        cfg = ExperimentConfig(
            p.h, p.w, p.k, args.n, mus[0], args.trials, args.seed,
            check_orientability=True,
        )
        records = _run_batch(cfg, stream_base=0)
        frac = sum(1 for r in records if r.orientable) / len(records)
        sizes = list(range(p.h, p.min_edge_size - 1, -1))
        if args.format == "json":
            text = _json_text(
                "simulate",
                {
                    "h": p.h, "w": p.w, "k": p.k, "n": args.n,
                    "trials": args.trials, "seed": args.seed,
                    "mu_bar": mus[0],
                    "fraction_orientable": frac,
                    "half_width": _wald_half_width(frac, args.trials),
                    "records": [_record_dict(r) for r in records],
                },
            )
        else:
            header, rows = _record_rows(records, sizes)
            text = _csv_text(header, rows)
        _write_text(args.out, text)
        return 0
    bracket = (mus[0], mus[1]) if len(mus) >= 2 else None
    report = simulate_threshold(
        p, args.n, args.trials, args.seed,
        tol=args.tol if args.tol is not None else 0.05,
        bracket=bracket,
    )
    sizes = list(range(p.h, p.min_edge_size - 1, -1))
    if args.format == "json":
        text = _json_text(
            "simulate",
            {
                "h": p.h, "w": p.w, "k": p.k, "n": args.n,
                "trials": args.trials, "seed": args.seed,
                "estimate": report.estimate,
                "half_width": report.half_width,
                "bracket": list(report.bracket),
                "ode_threshold": report.ode_threshold,
                "probes": [
                    {"mu_bar": mu, "fraction": f, "half_width": hw}
                    for mu, f, hw in report.probes
                ],
                "records": [_record_dict(r) for r in report.records],
            },
        )
    else:
        header, rows = _record_rows(report.records, sizes)
        text = _csv_text(header, rows)
        print(
            f"estimate={report.estimate!r} half_width={report.half_width!r}",
            file=sys.stderr,
        )
    _write_text(args.out, text)
    return 0


def _cmd_core_profile(args) -> int:
    if args.mu is None or len(args.mu) != 1:
        raise SystemExit("core-profile: need exactly one --mu")
    cfg = ExperimentConfig(
        args.h, args.w, args.k, args.n, args.mu[0], args.trials, args.seed
    )
    report = core_profile(cfg)
    sizes = list(range(args.h, cfg.params.min_edge_size - 1, -1))
    if args.format == "json":
        text = _json_text(
            "core-profile",
            {
                "config": dataclasses.asdict(cfg),
                "prediction": (
                    _stats_dict(report.prediction) if report.prediction else None
                ),
                "mean_alpha": report.mean_alpha,
                "mean_beta": {str(s): b for s, b in report.mean_beta.items()},
                "mean_kappa": report.mean_kappa,
                "mean_mu_hat": report.mean_mu_hat,
                "deviations": report.deviations,
                "chi2": {
                    "stat": report.chi2_stat,
                    "pvalue": report.chi2_pvalue,
                    "dof": report.chi2_dof,
                },
                "records": [_record_dict(r) for r in report.records],
            },
        )
    else:
        pred = report.prediction
        header = ["kind", "mu_bar", "alpha"]
        header += [f"beta_{s}" for s in sizes]
        header += ["kappa", "mu_hat", "chi2_pvalue"]
        rows = []
        if pred is not None:
            rows.append(
                ["prediction", cfg.mu_bar, pred.alpha]
                + [pred.beta.get(s, 0.0) for s in sizes]
                + [pred.kappa, pred.mu_hat, None]
            )
        else:
            rows.append(
                ["prediction", cfg.mu_bar, 0.0]
                + [0.0 for _ in sizes]
                + [0.0, 0.0, None]
            )
        rows.append(
            ["trial-mean", cfg.mu_bar, report.mean_alpha]
            + [report.mean_beta[s] for s in sizes]
            + [report.mean_kappa, report.mean_mu_hat, report.chi2_pvalue]
        )
        for r in report.records:
            rows.append(
                [f"trial-{r.trial}", r.mu_bar, r.n_core / cfg.n]
                + [r.m_core.get(s, 0) / cfg.n for s in sizes]
                + [r.kappa, r.mu_hat, None]
            )
        text = _csv_text(header, rows)
    _write_text(args.out, text)
    return 0


def _cmd_table1(args) -> int:
    rows = table1_rows(tol=args.tol if args.tol is not None else 1e-4)
    columns = [
        "h", "w", "k", "mu_tilde", "mu_hat",
        "ref_mu_tilde", "ref_mu_hat", "delta_mu_tilde", "delta_mu_hat",
        "trivial_bound", "error",
    ]
    if args.format == "json":
        text = _json_text("table1", {"rows": rows})
    else:
        text = _csv_text(columns, [[row[c] for c in columns] for row in rows])
    _write_text(args.out, text)
    return 0 if all(not row["error"] for row in rows) else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wkorient",
        description=(
            "Orientations and cores of random uniform hypergraphs: "
            "single-instance tools plus numeric-vs-simulation experiments."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, *, w=True, k=True):
        sp.add_argument("--h", type=int, required=True, help="edge size")
        if w:
            sp.add_argument("--w", type=int, required=True, help="signs per edge")
        if k:
            sp.add_argument("--k", type=int, required=True, help="indegree cap")

    def io_flags(sp):
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument(
            "--format", choices=("csv", "json"), default="csv",
            help="structured output format",
        )

    sp = sub.add_parser("gen", help="sample a random hypergraph to a file")
    sp.add_argument("--h", type=int, required=True)
    sp.add_argument("--n", type=int, required=True, help="vertices")
    sp.add_argument("--m", type=int, help="edges")
    sp.add_argument("--mu", type=float, help="mean degree (sets m=round(mu*n/h))")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_gen)

    sp = sub.add_parser("core", help="peel a hypergraph file to its core")
    sp.add_argument("input", help="hypergraph file ('-' for stdin)")
    common(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_core)

    sp = sub.add_parser("orient", help="decide orientability of a file")
    sp.add_argument("input", help="hypergraph file ('-' for stdin)")
    common(sp)
    io_flags(sp)
    sp.set_defaults(func=_cmd_orient)

    sp = sub.add_parser("stats", help="summary statistics of a file")
    sp.add_argument("input", help="hypergraph file ('-' for stdin)")
    sp.add_argument("--h", type=int, required=True)
    sp.add_argument("--w", type=int, required=True)
    sp.add_argument("--k", type=int, default=1, help="only used for validation")
    io_flags(sp)
    sp.set_defaults(func=_cmd_stats)

    sp = sub.add_parser("ode", help="integrate the core-evolution system")
    common(sp)
    sp.add_argument("--mu", type=float, required=True, help="initial mean degree")
    sp.add_argument("--tol", type=float, help="override relative tolerance")
    io_flags(sp)
    sp.set_defaults(func=_cmd_ode)

    sp = sub.add_parser("threshold", help="numeric orientability threshold")
    common(sp)
    sp.add_argument("--tol", type=float, help="bisection width (default 1e-4)")
    io_flags(sp)
    sp.set_defaults(func=_cmd_threshold)

    sp = sub.add_parser(
        "simulate",
        help="empirical orientable fraction / threshold by simulation",
    )
    common(sp)
    sp.add_argument("--n", type=int, default=100_000, help="vertices per trial")
    sp.add_argument(
        "--mu", type=float, action="append",
        help="one value: evaluate there; two values: bisection bracket; "
        "absent: bracket seeded from the numeric threshold",
    )
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, help="bisection width (default 0.05)")
    io_flags(sp)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser(
        "core-profile",
        help="empirical core statistics vs. the numeric prediction",
    )
    common(sp)
    sp.add_argument("--n", type=int, default=100_000)
    sp.add_argument("--mu", type=float, action="append", required=True)
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    io_flags(sp)
    sp.set_defaults(func=_cmd_core_profile)

    sp = sub.add_parser("table1", help="threshold table for the reference rows")
    sp.add_argument("--tol", type=float, help="bisection width (default 1e-4)")
    io_flags(sp)
    sp.set_defaults(func=_cmd_table1)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"wkorient: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
