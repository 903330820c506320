"""Batch experiments: parameter sweeps, strategy races, and bound checks.

These back the CLI and reproduce the reference simulation protocol at desk
scale: directed G(n, D/n) graphs, per-edge uniform or constant trust,
constant rating 1, equal rater/non-rater weight, and mean curves over seeds.

Within one seed, rater sets for different fractions k are nested prefixes of
a single random permutation. Raising k then only ever adds raters rating at
least as high as any current score, so per-seed unsatisfied curves are
monotone by construction rather than only in expectation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .analytics import ModelParams, k_max_for_target, k_min_for_target
from .editing import EditingConfig, SessionLog, run_session
from .errors import ValidationError
from .graph import ErdosRenyiSpec, TrustDist, generate_erdos_renyi
from .satisfaction import SessionState, SolverConfig, satisfied_count, solve_iterative
from .selection import SelectionStrategy


def _check_grid(grid: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(grid, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError(f"{name} grid must be nonempty")
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise ValidationError(f"{name} grid must be strictly increasing")
    return arr


def _check_seeds(seeds: Sequence[int]) -> List[int]:
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValidationError("seeds must be nonempty")
    return seeds


def _spawn(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass
class SweepRow:
    value: float
    mean: float
    stderr: float


def _mean_stderr(vals: np.ndarray) -> tuple[float, float]:
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    return mean, stderr


def sweep_rater_fraction(
    n_nodes: int,
    edge_prob: float,
    trust_dist: TrustDist,
    thresholds: np.ndarray | float,
    rating: float,
    k_grid: Sequence[float],
    seeds: Sequence[int],
    cfg: Optional[SolverConfig] = None,
    alpha: float = 0.5,
) -> List[SweepRow]:
    """Unsatisfied fraction (over all users) vs rater fraction, one graph
    per seed reused across the grid with nested rater prefixes."""
    k_grid = _check_grid(k_grid, "k")
    seeds = _check_seeds(seeds)
    if np.isscalar(thresholds):
        thresholds = np.full(n_nodes, float(thresholds))
    results = np.empty((len(seeds), k_grid.size))
    for si, seed in enumerate(seeds):
        graph_rng, perm_rng = _spawn(seed, 2)
        g = generate_erdos_renyi(
            ErdosRenyiSpec(n_nodes, edge_prob, trust_dist, int(graph_rng.integers(2**63 - 1)))
        )
        perm = perm_rng.permutation(n_nodes)
        for ki, k in enumerate(k_grid):
            raters = perm[: int(round(k * n_nodes))]
            state = SessionState({int(i): rating for i in raters}, thresholds, alpha)
            sv = solve_iterative(g, state, cfg)
            count, _ = satisfied_count(sv, thresholds)
            results[si, ki] = 1.0 - count / n_nodes
    return [
        SweepRow(float(k), *_mean_stderr(results[:, ki])) for ki, k in enumerate(k_grid)
    ]


def sweep_edge_prob(
    n_nodes: int,
    p_grid: Sequence[float],
    trust_dist: TrustDist,
    thresholds: np.ndarray | float,
    rating: float,
    rater_fraction: float,
    seeds: Sequence[int],
    cfg: Optional[SolverConfig] = None,
    alpha: float = 0.5,
) -> List[SweepRow]:
    """Unsatisfied fraction vs edge probability at a fixed rater fraction."""
    p_grid = _check_grid(p_grid, "p")
    seeds = _check_seeds(seeds)
    if np.isscalar(thresholds):
        thresholds = np.full(n_nodes, float(thresholds))
    results = np.empty((len(seeds), p_grid.size))
    for si, seed in enumerate(seeds):
        graph_rng, perm_rng = _spawn(seed, 2)
        perm = perm_rng.permutation(n_nodes)
        raters = perm[: int(round(rater_fraction * n_nodes))]
        for pi, p in enumerate(p_grid):
            g = generate_erdos_renyi(
                ErdosRenyiSpec(n_nodes, float(p), trust_dist, int(graph_rng.integers(2**63 - 1)))
            )
            state = SessionState({int(i): rating for i in raters}, thresholds, alpha)
            sv = solve_iterative(g, state, cfg)
            count, _ = satisfied_count(sv, thresholds)
            results[si, pi] = 1.0 - count / n_nodes
    return [
        SweepRow(float(p), *_mean_stderr(results[:, pi])) for pi, p in enumerate(p_grid)
    ]


@dataclass
class StrategyRun:
    strategy: str
    seed: int
    log: SessionLog


def compare_strategies(
    n_nodes: int,
    edge_prob: float,
    trust_dist: TrustDist,
    thresholds: np.ndarray | float,
    rating: float,
    seeds: Sequence[int],
    strategies: Iterable[str] = ("random", "trust", "marginal"),
    cfg: Optional[SolverConfig] = None,
    publish_fraction: float = 1.0,
    max_rounds: Optional[int] = None,
) -> List[StrategyRun]:
    """Run full sessions for each strategy on identical per-seed graphs."""
    seeds = _check_seeds(seeds)
    if np.isscalar(thresholds):
        thresholds = np.full(n_nodes, float(thresholds))
    runs: List[StrategyRun] = []
    for seed in seeds:
        graph_rng, session_rng_base = np.random.SeedSequence(seed).spawn(2)
        g = generate_erdos_renyi(
            ErdosRenyiSpec(
                n_nodes,
                edge_prob,
                trust_dist,
                int(np.random.default_rng(graph_rng).integers(2**63 - 1)),
            )
        )
        for name in strategies:
            econf = EditingConfig(
                strategy=SelectionStrategy(name, assumed_rating=rating),
                publish_fraction=publish_fraction,
                max_rounds=max_rounds,
                rating_source=rating,
            )
            rng = np.random.default_rng(session_rng_base)
            runs.append(StrategyRun(name, seed, run_session(g, thresholds, econf, cfg, rng)))
    return runs


def median_raters_to_publish(runs: List[StrategyRun]) -> Dict[str, float]:
    """Median number of raters used by published sessions, per strategy."""
    out: Dict[str, float] = {}
    names = sorted({r.strategy for r in runs})
    for name in names:
        counts = [r.log.raters_used() for r in runs if r.strategy == name and r.log.status == "published"]
        out[name] = float(np.median(counts)) if counts else math.nan
    return out


def empirical_k_for_target(
    n_nodes: int,
    edge_prob: float,
    trust_dist: TrustDist,
    threshold: float,
    rating: float,
    target_share: float,
    seeds: Sequence[int],
    cfg: Optional[SolverConfig] = None,
    k_resolution: float = 0.005,
) -> float:
    """Smallest rater fraction whose mean non-rater satisfied share reaches
    the target, found by bisection over k. Graphs and rater permutations
    are fixed per seed, so probes at different k are nested and the probed
    share is monotone in k seed by seed."""
    seeds = _check_seeds(seeds)
    thresholds = np.full(n_nodes, threshold)
    graphs = []
    perms = []
    for seed in seeds:
        graph_rng, perm_rng = _spawn(seed, 2)
        graphs.append(
            generate_erdos_renyi(
                ErdosRenyiSpec(n_nodes, edge_prob, trust_dist, int(graph_rng.integers(2**63 - 1)))
            )
        )
        perms.append(perm_rng.permutation(n_nodes))

    def share_at(k: float) -> float:
        shares = []
        for g, perm in zip(graphs, perms):
            n_r = int(round(k * n_nodes))
            raters = perm[:n_r]
            state = SessionState({int(i): rating for i in raters}, thresholds, 0.5)
            sv = solve_iterative(g, state, cfg)
            non_raters = perm[n_r:]
            sat = np.count_nonzero(sv.scores[non_raters] > thresholds[non_raters])
            shares.append(sat / max(non_raters.size, 1))
        return float(np.mean(shares))

    lo, hi = 0.0, 1.0
    if share_at(hi - k_resolution) < target_share:
        return 1.0
    while hi - lo > k_resolution:
        mid = 0.5 * (lo + hi)
        if share_at(mid) >= target_share:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class BoundsRow:
    share: float
    k_min: float
    k_max: float
    k_hat: float = math.nan


def bounds_table(
    params: ModelParams,
    shares: Sequence[float],
    empirical: Optional[Callable[[float], float]] = None,
) -> List[BoundsRow]:
    """Evaluate the necessary/sufficient rater-fraction bounds over a grid
    of target non-rater shares, optionally alongside a measured k."""
    shares = _check_grid(shares, "T")
    rows = []
    for s in shares:
        row = BoundsRow(
            share=float(s),
            k_min=k_min_for_target(params, float(s)),
            k_max=k_max_for_target(params, float(s)),
        )
        if empirical is not None:
            row.k_hat = empirical(float(s))
        rows.append(row)
    return rows


def _norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _truncated_mean(mu: float, sigma: float) -> float:
    a = (0.0 - mu) / sigma
    b = (1.0 - mu) / sigma
    z = _norm_cdf(b) - _norm_cdf(a)
    return mu + sigma * (_norm_pdf(a) - _norm_pdf(b)) / z


def truncated_normal_thresholds(
    n: int,
    rng: np.random.Generator,
    target_mean: float = 0.25,
    variance: float = 0.144,
) -> tuple[np.ndarray, float, float]:
    """Heterogeneous thresholds: a normal rejection-sampled into [0, 1],
    with its location tuned so the post-truncation mean hits the target.
    Returns (thresholds, achieved_mean, achieved_variance)."""
    if not (0.0 < target_mean < 1.0):
        raise ValidationError(f"target_mean must lie in (0, 1), got {target_mean}")
    sigma = math.sqrt(variance)
    lo, hi = -4.0, 4.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _truncated_mean(mid, sigma) < target_mean:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    out = np.empty(n)
    filled = 0
    while filled < n:
        draw = rng.normal(mu, sigma, size=max(2 * (n - filled), 64))
        keep = draw[(draw >= 0.0) & (draw <= 1.0)]
        take = min(keep.size, n - filled)
        out[filled : filled + take] = keep[:take]
        filled += take
    return out, float(out.mean()), float(out.var())


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], header: Dict[str, object]) -> None:
    """CSV with a comment block echoing the resolved configuration."""
    with open(path, "w", encoding="utf-8") as f:
        for key, value in header.items():
            f.write(f"# {key} = {value}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)
