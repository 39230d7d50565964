"""Counterfactual regret minimisation: CFR, CFR+ and predictive CFR+.

All work is vectorised over sequences.  For player ``p`` the counterfactual
value of sequence ``sigma`` is the expected utility (``p``'s own sign) of
reaching it and then following the current strategy, weighted by chance and
opponent reach.  Regret of an action is its sequence value minus the value
of its infoset under the current strategy.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .efg import MAX, MIN, BehavioralStrategy, GameError, GameTree, expected_value

log = logging.getLogger(__name__)

VARIANTS = ("cfr", "cfr+", "pcfr+")
AVERAGING = ("uniform", "linear", "quadratic")


@dataclass
class SolveConfig:
    variant: str = "pcfr+"
    max_iterations: int = 10_000
    target_exploitability: float = 1e-3
    averaging: str | None = None      # default: quadratic for plus variants, uniform for cfr
    alternating: bool = True
    check_every: int = 100
    seed: int = 0                     # recorded for the manifest; the solver is deterministic
    workers: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise GameError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.averaging is None:
            self.averaging = "uniform" if self.variant == "cfr" else "quadratic"
        if self.averaging not in AVERAGING:
            raise GameError(f"unknown averaging {self.averaging!r}")
        if self.max_iterations < 1:
            raise GameError("max_iterations must be >= 1")
        if not self.target_exploitability > 0:
            raise GameError("target_exploitability must be positive")
        if self.check_every < 1:
            raise GameError("check_every must be >= 1")


class _Segments:
    """Contiguous per-infoset segments of one player's sequences 1..n-1."""

    def __init__(self, game: GameTree, p: int):
        sf = game.sequence_form
        infs = sf.infosets[p]
        self.sizes = sf.num_actions[infs]
        self.offsets = sf.seq_start[infs] - 1
        self.n = sf.num_seqs[p]

    def normalize(self, w: np.ndarray) -> np.ndarray:
        """Per-infoset normalisation of nonnegative weights; uniform where all zero."""
        out = np.ones(self.n)
        if self.n == 1:
            return out
        body = w[1:]
        tot = np.add.reduceat(body, self.offsets)
        rep = np.repeat(tot, self.sizes)
        uni = np.repeat(1.0 / self.sizes, self.sizes)
        with np.errstate(invalid="ignore", divide="ignore"):
            out[1:] = np.where(rep > 0, body / np.where(rep > 0, rep, 1.0), uni)
        return out


@dataclass
class RegretState:
    variant: str
    iteration: int
    regrets: list        # per player, indexed by sequence
    strategy_sums: list  # per player, realization-weighted
    predictions: list    # per player (PCFR+), last instantaneous regrets
    current: list        # per player, current behavioral vector

    def copy(self) -> "RegretState":
        return RegretState(self.variant, self.iteration,
                           [a.copy() for a in self.regrets], [a.copy() for a in self.strategy_sums],
                           [a.copy() for a in self.predictions], [a.copy() for a in self.current])


def init_state(game: GameTree, variant: str = "pcfr+") -> RegretState:
    sf = game.sequence_form
    zeros = [np.zeros(sf.num_seqs[p]) for p in (MAX, MIN)]
    return RegretState(variant, 0, [z.copy() for z in zeros], [z.copy() for z in zeros],
                       [z.copy() for z in zeros], [sf.uniform_behavior(p) for p in (MAX, MIN)])


def _instant_regrets(game: GameTree, p: int, b_self: np.ndarray, b_opp: np.ndarray) -> np.ndarray:
    sf = game.sequence_form
    sign = 1.0 if p == MAX else -1.0
    tv = sf.terminal_values(p, sf.realization(1 - p, b_opp)) * sign
    v = tv
    regret = np.zeros(sf.num_seqs[p])
    for lv in reversed(sf.levels[p]):
        seg = v[lv.seqs]
        inf_val = np.add.reduceat(b_self[lv.seqs] * seg, lv.offsets)
        regret[lv.seqs] = seg - np.repeat(inf_val, lv.sizes)
        lv.add_to_parents(v, inf_val)
    return regret


def _weight(config_avg: str, t: int) -> float:
    return {"uniform": 1.0, "linear": float(t), "quadratic": float(t) * t}[config_avg]


def one_iteration(game: GameTree, state: RegretState, config: SolveConfig | None = None) -> RegretState:
    """Advance ``state`` by one sweep (both players) in place and return it."""
    config = config or SolveConfig(variant=state.variant)
    segs = [_Segments(game, p) for p in (MAX, MIN)]
    sf = game.sequence_form
    state.iteration += 1
    t = state.iteration
    w = _weight(config.averaging, t)
    snapshot = [b.copy() for b in state.current]
    for p in (MAX, MIN):
        opp = state.current[1 - p] if config.alternating else snapshot[1 - p]
        b = state.current[p]
        state.strategy_sums[p] += w * sf.realization(p, b)
        inst = _instant_regrets(game, p, b, opp)
        r = state.regrets[p]
        r += inst
        if state.variant in ("cfr+", "pcfr+"):
            np.maximum(r, 0.0, out=r)
        if state.variant == "pcfr+":
            state.predictions[p] = inst
            state.current[p] = segs[p].normalize(np.maximum(r + inst, 0.0))
        else:
            state.current[p] = segs[p].normalize(np.maximum(r, 0.0))
    return state


def average_strategy(game: GameTree, state: RegretState, p: int) -> BehavioralStrategy:
    seg = _Segments(game, p)
    return BehavioralStrategy(game, p, seg.normalize(state.strategy_sums[p]), exact=False)


def float_exploitability(game: GameTree, xb: np.ndarray, yb: np.ndarray):
    """(exploitability, value, lower, upper) for float behavioral vectors."""
    sf = game.sequence_form
    rx = sf.realization(MAX, xb)
    ry = sf.realization(MIN, yb)
    value = float(np.sum(sf.weighted_payoff * rx[sf.term_seq[0]] * ry[sf.term_seq[1]]))
    v_up, _ = sf.best_response_values(MAX, sf.terminal_values(MAX, ry))
    v_lo, _ = sf.best_response_values(MIN, sf.terminal_values(MIN, rx))
    upper, lower = float(v_up[0]), float(v_lo[0])
    return upper - lower, value, lower, upper


@dataclass
class SolveReport:
    algorithm: str
    value: float
    exploitability: float
    lower: float
    upper: float
    iterations: int
    reached_target: bool
    x: BehavioralStrategy | None = None
    y: BehavioralStrategy | None = None
    trace: list = field(default_factory=list)   # (iteration, exploitability, value)
    seconds: float = 0.0
    exact_value: object = None                  # Fraction when certified exactly
    certified_lower: object = None
    certified_upper: object = None


def solve_cfr(game: GameTree, config: SolveConfig | None = None, callback=None) -> SolveReport:
    """Run the configured regret minimiser until the average strategy pair's
    exploitability drops below the target or the iteration cap is reached."""
    config = config or SolveConfig()
    t0 = time.perf_counter()
    state = init_state(game, config.variant)
    trace = []
    expl = value = lower = upper = float("nan")
    reached = False
    for it in range(1, config.max_iterations + 1):
        one_iteration(game, state, config)
        if it % config.check_every == 0 or it == config.max_iterations:
            xb = _Segments(game, MAX).normalize(state.strategy_sums[MAX])
            yb = _Segments(game, MIN).normalize(state.strategy_sums[MIN])
            expl, value, lower, upper = float_exploitability(game, xb, yb)
            trace.append((it, expl, value))
            log.info("iter %d exploitability %.3g value %.6f", it, expl, value)
            if callback is not None:
                callback(it, expl, value)
            if expl < config.target_exploitability:
                reached = True
                break
    return SolveReport(
        algorithm=config.variant, value=value, exploitability=expl, lower=lower, upper=upper,
        iterations=state.iteration, reached_target=reached,
        x=average_strategy(game, state, MAX), y=average_strategy(game, state, MIN),
        trace=trace, seconds=time.perf_counter() - t0)
