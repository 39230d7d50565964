"""Sequence-form linear programming with exact rational certification.

MAX's program over realization plan ``x`` and MIN infoset values ``q``::

    maximise  q_root
    s.t.      F^T q - A^T x <= 0,   E x = e,   x >= 0,   q free

Exact values come from a float solve (HiGHS via scipy) whose strategies are
rounded to nearby fractions and then certified by exact best response; when
the two bounds do not meet, an exact Bland-rule simplex is run instead.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .efg import (MAX, MIN, BehavioralStrategy, GameError, GameTree,
                  best_response, rationalize)

log = logging.getLogger(__name__)

DENOMINATOR_CAPS = (10, 100, 1000, 10**4, 10**5, 10**6)


@dataclass
class SequenceFormLP:
    game: GameTree
    nx: int
    ny: int
    A_rows: np.ndarray
    A_cols: np.ndarray
    A_vals: list            # Fractions, chance-weighted payoffs
    E: sp.csr_matrix        # (1 + MAX infosets) x nx, entries in {-1, 0, 1}
    F: sp.csr_matrix        # (1 + MIN infosets) x ny

    @property
    def A(self) -> sp.csr_matrix:
        return sp.csr_matrix((np.array([float(v) for v in self.A_vals]), (self.A_rows, self.A_cols)),
                             shape=(self.nx, self.ny))

    def A_exact(self) -> dict:
        return {(int(r), int(c)): v for r, c, v in zip(self.A_rows, self.A_cols, self.A_vals)}

    def bilinear(self, x_real, y_real):
        """x^T A y for realization plans (exact when given Fractions)."""
        total = 0
        for r, c, v in zip(self.A_rows.tolist(), self.A_cols.tolist(), self.A_vals):
            total += x_real[r] * v * y_real[c]
        return total


def _flow_matrix(game: GameTree, p: int) -> sp.csr_matrix:
    sf = game.sequence_form
    infs = sf.infosets[p]
    rows, cols, vals = [0], [0], [1]
    for r, iid in enumerate(infs.tolist(), start=1):
        rows.append(r)
        cols.append(int(sf.parent_seq[iid]))
        vals.append(-1)
        s = int(sf.seq_start[iid])
        for a in range(int(sf.num_actions[iid])):
            rows.append(r)
            cols.append(s + a)
            vals.append(1)
    return sp.csr_matrix((np.array(vals, dtype=float), (rows, cols)), shape=(len(infs) + 1, sf.num_seqs[p]))


def build_lp(game: GameTree) -> SequenceFormLP:
    sf = game.sequence_form
    nx, ny = sf.num_seqs
    acc: dict = {}
    weights: dict = {}
    for sx, sy, ri, pi in zip(sf.term_seq[0].tolist(), sf.term_seq[1].tolist(),
                              sf.term_reach_idx.tolist(), sf.term_payoff_idx.tolist()):
        w = weights.get((ri, pi))
        if w is None:
            w = weights[(ri, pi)] = sf.reach_values[ri] * game.values[pi]
        if w:
            acc[(sx, sy)] = acc.get((sx, sy), Fraction(0)) + w
    keys = sorted(k for k, v in acc.items() if v)
    rows = np.array([k[0] for k in keys], dtype=np.int64)
    cols = np.array([k[1] for k in keys], dtype=np.int64)
    return SequenceFormLP(game, nx, ny, rows, cols, [acc[k] for k in keys],
                          _flow_matrix(game, MAX), _flow_matrix(game, MIN))


@dataclass
class FloatSolution:
    value: float
    x: np.ndarray   # MAX realization plan
    y: np.ndarray   # MIN realization plan
    seconds: float = 0.0


def solve_float(lp: SequenceFormLP) -> FloatSolution:
    """Solve the sequence-form LP in double precision with HiGHS."""
    t0 = time.perf_counter()
    nq = lp.F.shape[0]
    nEx = lp.E.shape[0]
    c = np.zeros(lp.nx + nq)
    c[lp.nx] = -1.0
    A_ub = sp.hstack([-lp.A.T, lp.F.T]).tocsr()
    A_eq = sp.hstack([lp.E, sp.csr_matrix((nEx, nq))]).tocsr()
    b_eq = np.zeros(nEx)
    b_eq[0] = 1.0
    bounds = [(0, None)] * lp.nx + [(None, None)] * nq
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(lp.ny), A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise GameError(f"float LP failed: {res.message}")
    x = np.clip(res.x[:lp.nx], 0, None)
    y = np.clip(-res.ineqlin.marginals, 0, None)
    return FloatSolution(-res.fun, x, y, time.perf_counter() - t0)


def behavior_from_realization(game: GameTree, p: int, real, max_denominator: int | None = None):
    """Behavioral strategy from a realization plan.

    Float plans are rounded per infoset to fractions with denominator at most
    ``max_denominator`` and renormalised; unreached infosets play uniformly.
    """
    sf = game.sequence_form
    exact = max_denominator is not None or not isinstance(real, np.ndarray)
    vals = [Fraction(1)] * sf.num_seqs[p] if exact else np.ones(sf.num_seqs[p])
    for iid in sf.infosets[p].tolist():
        s = int(sf.seq_start[iid])
        k = int(sf.num_actions[iid])
        par = real[int(sf.parent_seq[iid])]
        seg = real[s:s + k]
        if exact:
            if max_denominator is not None:
                tot = float(np.sum(seg))
                if tot <= 1e-12 * max(float(par), 1e-300) or tot <= 0:
                    probs = [Fraction(1, k)] * k
                else:
                    probs = [rationalize(max(float(v), 0.0) / tot, max_denominator) for v in seg]
                    z = sum(probs, Fraction(0))
                    probs = [v / z for v in probs] if z > 0 else [Fraction(1, k)] * k
            else:
                tot = sum(seg, Fraction(0))
                probs = [Fraction(v) / tot for v in seg] if tot else [Fraction(1, k)] * k
            vals[s:s + k] = probs
        else:
            tot = float(np.sum(seg))
            vals[s:s + k] = seg / tot if tot > 0 else 1.0 / k
    return BehavioralStrategy(game, p, vals, exact=exact)


def certify(game: GameTree, x: BehavioralStrategy, y: BehavioralStrategy):
    """Exact bounds (lower, upper) on the game value from rational strategies.

    lower = u(x, BR_MIN(x)) and upper = u(BR_MAX(y), y).
    """
    if not (x.exact and y.exact):
        raise GameError("certification requires exact (rational) strategies")
    _, lower = best_response(game, x)
    _, upper = best_response(game, y)
    return lower, upper


@dataclass
class ExactSolution:
    value: Fraction | None
    x: BehavioralStrategy | None
    y: BehavioralStrategy | None
    lower: Fraction | None = None
    upper: Fraction | None = None
    pivots: int = 0
    method: str = ""
    denominator_cap: int | None = None
    notes: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.value is not None


def round_and_certify(game: GameTree, sol: FloatSolution, caps=DENOMINATOR_CAPS):
    """Try increasing denominator caps until the certified bounds meet.

    Returns (x, y, lower, upper, cap) for the tightest attempt.
    """
    best = None
    for cap in caps:
        x = behavior_from_realization(game, MAX, sol.x, cap)
        y = behavior_from_realization(game, MIN, sol.y, cap)
        lower, upper = certify(game, x, y)
        log.debug("cap %d: lower %s upper %s", cap, lower, upper)
        if best is None or upper - lower < best[3] - best[2]:
            best = (x, y, lower, upper, cap)
        if lower == upper:
            break
    return best


def solve_exact(lp: SequenceFormLP, warmstart: FloatSolution | bool | None = True,
                max_simplex_size: int = 200_000) -> ExactSolution:
    """Exact game value and equilibrium strategies.

    With a warm start (default: a fresh HiGHS solve) the float strategies are
    rounded and certified.  If the bounds do not meet, the exact simplex runs
    from a cold start when the tableau is small enough; otherwise the
    certified interval is returned with ``value=None``.
    """
    game = lp.game
    notes = []
    best = None
    if warmstart:
        sol = warmstart if isinstance(warmstart, FloatSolution) else solve_float(lp)
        x, y, lower, upper, cap = round_and_certify(game, sol)
        if lower == upper:
            return ExactSolution(lower, x, y, lower, upper, 0, "warmstart-rounding", cap, notes)
        notes.append(f"rounded warm start left gap [{lower}, {upper}]; falling back to cold start")
        best = (x, y, lower, upper)
    size = (lp.ny + lp.E.shape[0]) * (lp.nx + 2 * lp.F.shape[0] + lp.ny)
    if size > max_simplex_size and best is not None:
        notes.append("tableau too large for exact simplex; returning certified interval")
        x, y, lower, upper = best
        return ExactSolution(None, x, y, lower, upper, 0, "interval", None, notes)
    value, x_real, y_real, pivots = simplex_exact(lp)
    x = behavior_from_realization(game, MAX, x_real)
    y = behavior_from_realization(game, MIN, y_real)
    lower, upper = certify(game, x, y)
    if not lower == value == upper:
        raise GameError(f"exact simplex certificate failed: {lower} <= {value} <= {upper}")
    return ExactSolution(value, x, y, lower, upper, pivots, "simplex", None, notes)


def solve_game_exact(game: GameTree, **kw) -> ExactSolution:
    return solve_exact(build_lp(game), **kw)


# -- exact simplex ----------------------------------------------------------------


def simplex_exact(lp: SequenceFormLP):
    """Two-phase primal simplex in rationals with Bland's rule.

    Standard form over columns [x (nx) | q+ (nq) | q- (nq) | s (ny)]::

        -A^T x + F^T q+ - F^T q- + s = 0     (one row per MIN sequence)
         E x                         = e

    Returns (value, x realization, y realization, pivots); ``y`` is read off
    the final reduced costs of the slack columns.
    """
    nx, ny = lp.nx, lp.ny
    nq = lp.F.shape[0]
    nEx = lp.E.shape[0]
    ncols = nx + 2 * nq + ny
    rows: list[dict] = []
    rhs: list[Fraction] = []
    At = {}
    for (r, c), v in lp.A_exact().items():
        At.setdefault(c, {})[r] = -v
    Ft = lp.F.T.tocsr()
    for j in range(ny):
        row = {k: Fraction(v) for k, v in At.get(j, {}).items()}
        lo, hi = Ft.indptr[j], Ft.indptr[j + 1]
        for q, v in zip(Ft.indices[lo:hi], Ft.data[lo:hi]):
            row[nx + q] = Fraction(int(v))
            row[nx + nq + q] = Fraction(-int(v))
        row[nx + 2 * nq + j] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(0))
    E = lp.E.tocsr()
    for i in range(nEx):
        lo, hi = E.indptr[i], E.indptr[i + 1]
        rows.append({int(c): Fraction(int(v)) for c, v in zip(E.indices[lo:hi], E.data[lo:hi])})
        rhs.append(Fraction(1 if i == 0 else 0))
    m = len(rows)
    # initial basis: slacks for MIN rows, artificials for E rows
    basis = [nx + 2 * nq + j for j in range(ny)]
    art0 = ncols
    for i in range(nEx):
        rows[ny + i][art0 + i] = Fraction(1)
        basis.append(art0 + i)
    pivots = 0

    def run(obj: dict, allowed):
        """Maximise obj over current tableau; obj given over original columns."""
        nonlocal pivots
        # reduced costs: c_j - c_B B^-1 a_j, tableau rows already B^-1 A
        z = dict(obj)
        zval = Fraction(0)
        for i, bv in enumerate(basis):
            cb = obj.get(bv)
            if cb:
                for k, v in rows[i].items():
                    z[k] = z.get(k, Fraction(0)) - cb * v
                zval += cb * rhs[i]
        while True:
            enter = min((k for k, v in z.items() if v > 0 and allowed(k)), default=None)
            if enter is None:
                return zval, z
            best, leave = None, None
            for i in range(m):
                a = rows[i].get(enter)
                if a is not None and a > 0:
                    ratio = rhs[i] / a
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                raise GameError("exact simplex: unbounded program")
            pr = rows[leave]
            piv = pr[enter]
            if piv != 1:
                for k in pr:
                    pr[k] /= piv
                rhs[leave] /= piv
            for i in range(m):
                if i == leave:
                    continue
                a = rows[i].get(enter)
                if a:
                    r = rows[i]
                    for k, v in pr.items():
                        nv = r.get(k, 0) - a * v
                        if nv:
                            r[k] = nv
                        else:
                            r.pop(k, None)
                    rhs[i] -= a * rhs[leave]
            a = z.get(enter)
            if a:
                for k, v in pr.items():
                    nv = z.get(k, 0) - a * v
                    if nv:
                        z[k] = nv
                    else:
                        z.pop(k, None)
                zval += a * rhs[leave]
            basis[leave] = enter
            pivots += 1

    phase1 = {art0 + i: Fraction(-1) for i in range(nEx)}
    val1, _ = run(phase1, lambda k: True)
    if val1 != 0:
        raise GameError("exact simplex: infeasible program")
    # drive zero-level artificials out of the basis where possible
    for i, bv in enumerate(basis):
        if bv >= art0:
            for k in sorted(rows[i]):
                if k < art0 and rows[i][k] != 0:
                    pr = rows[i]
                    piv = pr[k]
                    for kk in pr:
                        pr[kk] /= piv
                    rhs[i] /= piv
                    for j in range(m):
                        if j != i and k in rows[j]:
                            a = rows[j][k]
                            for kk, v in pr.items():
                                nv = rows[j].get(kk, 0) - a * v
                                if nv:
                                    rows[j][kk] = nv
                                else:
                                    rows[j].pop(kk, None)
                            rhs[j] -= a * rhs[i]
                    basis[i] = k
                    pivots += 1
                    break
    obj = {nx: Fraction(1), nx + nq: Fraction(-1)}  # q_root = q+_0 - q-_0
    value, z = run(obj, lambda k: k < art0)
    x = [Fraction(0)] * nx
    for i, bv in enumerate(basis):
        if bv < nx:
            x[bv] = rhs[i]
    # duals of the MIN rows: y_j = -(reduced cost of slack j)
    y = [-z.get(nx + 2 * nq + j, Fraction(0)) for j in range(ny)]
    y = [v if v > 0 else Fraction(0) for v in y]
    return value, x, y, pivots
