"""End-to-end review sessions and the rating-agreement trust update.

A session repeatedly picks a reviewer, records their rating, re-solves the
scores, and stops when the satisfied fraction reaches the publication target
(``publish_fraction`` = 1 means nobody may sit at or below their threshold),
when it deadlocks, or when the round budget runs out. Document content is
held fixed within a session; an actual edit is modeled by clearing the state
(``SessionState.cleared``) and starting over.

A session deadlocks when every remaining unsatisfied user is already a rater
whose own rating is at or below their threshold: such scores are pinned and
no further selection can move them. Unsatisfied non-raters never deadlock a
session since they can still be picked to rate (satisfying themselves
whenever their rating exceeds their threshold).

Trust updates blend the old value with a rating-agreement term,

    t' = gamma * t + (1 - gamma) / (1 + sharpness * |r_i - r_j|),

applied in both directions between a new rater and every existing rater.
The agreement term is 1 for identical ratings and decays convexly with the
rating gap; it never quite reaches 0 (only as sharpness grows without
bound). Missing edges enter with old trust 0, so rating twice alike creates
trust without any direct interaction. Because only rater-rater edges are
touched, the current score solution is unaffected.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from .errors import ValidationError
from .graph import TrustGraph, build_graph
from .satisfaction import (
    SatisfactionVector,
    SessionState,
    SolverConfig,
    compute_weights,
    satisfied_count,
    solve_iterative,
)
from .selection import (
    DELTA_FAST_PATH_CAP,
    DeltaMatrix,
    SelectionStrategy,
    delta_init,
    delta_promote,
    marginal_greedy_fast,
    select_marginal_greedy,
    select_random,
    select_trust_greedy,
)

log = logging.getLogger(__name__)

DEFAULT_TRUST_SHARPNESS = 16.0


@dataclass(frozen=True)
class TrustUpdateConfig:
    gamma: float = 0.5  # weight kept from the previous trust value
    sharpness: float = DEFAULT_TRUST_SHARPNESS  # convexity of the agreement curve

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0):
            raise ValidationError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.sharpness > 0:
            raise ValidationError(f"sharpness must be > 0, got {self.sharpness}")


RatingSource = Union[float, np.ndarray]


@dataclass
class EditingConfig:
    strategy: SelectionStrategy
    publish_fraction: float = 1.0  # satisfied fraction required to publish
    max_rounds: Optional[int] = None  # default: one round per node
    rating_source: RatingSource = 1.0
    trust_update: Optional[TrustUpdateConfig] = None
    alpha: float = 0.5

    def validate(self, n_nodes: int) -> None:
        if not (0.0 < self.publish_fraction <= 1.0):
            raise ValidationError(
                f"publish_fraction must lie in (0, 1], got {self.publish_fraction}"
            )
        if isinstance(self.rating_source, np.ndarray):
            if self.rating_source.shape != (n_nodes,):
                raise ValidationError("per-node rating table must cover every node")
            if self.rating_source.min() < 0 or self.rating_source.max() > 1:
                raise ValidationError("ratings must lie in [0, 1]")
        elif not (0.0 <= float(self.rating_source) <= 1.0):
            raise ValidationError(f"rating must lie in [0, 1], got {self.rating_source}")

    def rating_for(self, node: int) -> float:
        if isinstance(self.rating_source, np.ndarray):
            return float(self.rating_source[node])
        return float(self.rating_source)


@dataclass
class SessionRound:
    round: int
    rater: int
    rating: float
    satisfied: int
    fraction: float


@dataclass
class SessionLog:
    rounds: List[SessionRound] = field(default_factory=list)
    status: str = "budget_exhausted"  # published | deadlock | budget_exhausted
    final: Optional[SatisfactionVector] = None
    state: Optional[SessionState] = None
    graph: Optional[TrustGraph] = None

    def raters_used(self) -> int:
        return len(self.rounds)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("round,rater,rating,satisfied,fraction\n")
            for r in self.rounds:
                f.write(f"{r.round},{r.rater},{r.rating:.12g},{r.satisfied},{r.fraction:.12g}\n")
            f.write(f"# status={self.status}\n")


def trust_update(t_old: float, r_i: float, r_j: float, cfg: TrustUpdateConfig) -> float:
    """Blend old trust with the rating-agreement term; symmetric in the
    two ratings and monotone decreasing in their distance."""
    for name, v in (("t_old", t_old), ("r_i", r_i), ("r_j", r_j)):
        if not (0.0 <= v <= 1.0):
            raise ValidationError(f"{name} must lie in [0, 1], got {v}")
    return cfg.gamma * t_old + (1.0 - cfg.gamma) / (1.0 + cfg.sharpness * abs(r_i - r_j))


def apply_rater_trust_updates(
    g: TrustGraph, state: SessionState, new_rater: int, cfg: TrustUpdateConfig
) -> TrustGraph:
    """New graph with both directed edges between `new_rater` and every
    other rater re-blended from their recorded ratings. Edges among
    non-raters are untouched, so current satisfaction weights survive."""
    if new_rater not in state.ratings:
        raise ValidationError(f"node {new_rater} has no recorded rating")
    others = [j for j in state.ratings if j != new_rater]
    if not others:
        return g
    r_new = state.ratings[new_rater]
    src, dst, trust = g.edge_arrays()
    edges = {(int(s), int(d)): float(t) for s, d, t in zip(src, dst, trust)}
    for j in others:
        r_j = state.ratings[j]
        for pair in ((new_rater, j), (j, new_rater)):
            t_new = trust_update(edges.get(pair, 0.0), r_new, r_j, cfg)
            if t_new > 0.0:
                edges[pair] = t_new
            else:  # gamma = 1 with no prior edge: still no edge
                edges.pop(pair, None)
    return build_graph(g.n_nodes, [(s, d, t) for (s, d), t in edges.items()])


def _select(g, state, cfg, solver_cfg, rng, s, dm):
    kind = cfg.strategy.kind
    if kind == "random":
        return select_random(g, state, rng)
    if kind == "trust":
        return select_trust_greedy(g, state)
    if dm is not None:
        return marginal_greedy_fast(g, state, s, dm, cfg.strategy.assumed_rating)
    return select_marginal_greedy(g, state, cfg.strategy.assumed_rating, solver_cfg)


def run_session(
    g: TrustGraph,
    thresholds: np.ndarray,
    cfg: EditingConfig,
    solver_cfg: Optional[SolverConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> SessionLog:
    """Run one review session to publication, deadlock, or budget
    exhaustion. Deterministic for a given rng seed."""
    cfg.validate(g.n_nodes)
    solver_cfg = solver_cfg or SolverConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    n = g.n_nodes
    max_rounds = cfg.max_rounds if cfg.max_rounds is not None else n

    state = SessionState({}, np.asarray(thresholds, dtype=np.float64), cfg.alpha)
    state.validate(n)

    use_fast = (
        cfg.strategy.kind == "marginal"
        and cfg.alpha == 0.5
        and n <= DELTA_FAST_PATH_CAP
    )
    dm: Optional[DeltaMatrix] = None
    weights = compute_weights(g, state) if cfg.alpha == 0.5 else None

    graph = g
    log_obj = SessionLog()
    sv = solve_iterative(graph, state, solver_cfg, weights=weights)
    count, _ = satisfied_count(sv, state.thresholds)
    fraction = count / n
    warned_no_progress = False

    round_no = 0
    while True:
        if fraction >= cfg.publish_fraction:
            log_obj.status = "published"
            break
        unsat = ~satisfied_count(sv, state.thresholds)[1]
        if unsat.any() and not (unsat & ~state.rater_mask(n)).any():
            # every unsatisfied user is a rater pinned at a rating at or
            # below their own threshold
            log_obj.status = "deadlock"
            break
        if round_no >= max_rounds:
            log_obj.status = "budget_exhausted"
            break

        if use_fast and dm is None:
            dm = delta_init(graph, state, solver_cfg)
        chosen = _select(graph, state, cfg, solver_cfg, rng, sv, dm)
        rating = cfg.rating_for(chosen)

        warm = sv.scores
        if dm is not None:
            # exact linear update at alpha = 0.5; the follow-up solve only
            # polishes numerics
            warm = sv.scores.copy()
            rise = rating - warm[chosen]
            warm[dm.free_nodes] += rise * dm.row(chosen)
            warm[chosen] = rating
            np.clip(warm, 0.0, 1.0, out=warm)
            dm = delta_promote(dm, chosen)

        state.add_rater(chosen, rating)
        if cfg.trust_update is not None:
            graph = apply_rater_trust_updates(graph, state, chosen, cfg.trust_update)
            weights = compute_weights(graph, state) if cfg.alpha == 0.5 else None

        solve_cfg = SolverConfig(
            tolerance=solver_cfg.tolerance,
            max_iterations=solver_cfg.max_iterations,
            warm_start=warm,
        )
        sv = solve_iterative(graph, state, solve_cfg, weights=weights)
        count, _ = satisfied_count(sv, state.thresholds)
        new_fraction = count / n
        if new_fraction <= fraction and not warned_no_progress and new_fraction < cfg.publish_fraction:
            log.debug("round %d: no satisfied-count progress (%.4f)", round_no + 1, new_fraction)
            warned_no_progress = True
        fraction = new_fraction

        round_no += 1
        log_obj.rounds.append(SessionRound(round_no, int(chosen), rating, count, fraction))

    log_obj.final = sv
    log_obj.state = state
    log_obj.graph = graph
    return log_obj
