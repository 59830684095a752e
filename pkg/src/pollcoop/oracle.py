"""Numerical reconstruction of strategies and characteristic functions.

Controls are piecewise constant on a uniform grid of M steps. The stock is
then piecewise linear, so each player's discretized payoff is evaluated
exactly for the given controls. Nothing here uses the closed-form strategies
or characteristic functions: the only inputs are the dynamics ``xdot = sum u``,
the running payoff ``b u - u^2/2 - d x`` and the boxes ``0 <= u <= b``.

Because the payoff is linear in the stock and the stock is linear in the
controls, the discretized objective of any coalition is separable across
steps and players. For one player at one step it is

    f(v) = a v - c v^2 / 2 + const

with ``c = h`` if the player's own revenue counts toward the objective and
``0`` otherwise. Each per-step problem is solved exactly: a clamped
stationary point when maximizing, an endpoint comparison when minimizing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .charfun import BASIC_KINDS, CFKind, cf_value
from .errors import CapacityError, InvalidControlError
from .game import Coalition, GameSpec

DEFAULT_M = 2000
VALIDATION_MAX_PLAYERS = 10


@dataclass(frozen=True)
class DiscretizedControl:
    M: int
    values: np.ndarray = field(repr=False)  # shape (n, M); step k uses column k

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be at least 1")
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != self.M:
            raise ValueError(f"expected shape (n, {self.M}), got {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, n: int, M: int) -> "DiscretizedControl":
        return cls(M, np.zeros((n, M)))


@dataclass(frozen=True)
class OracleResult:
    value: float | tuple[float, ...]
    control: DiscretizedControl
    iterations: int = 1
    residual: float = 0.0
    info: dict = field(default_factory=dict)


def step_length(spec: GameSpec, M: int) -> float:
    return (spec.T - spec.t0) / M


def midpoints(spec: GameSpec, M: int) -> np.ndarray:
    h = step_length(spec, M)
    return spec.t0 + h * (np.arange(M) + 0.5)


def _stock_weights(spec: GameSpec, M: int) -> np.ndarray:
    """d/du_k of the integral of x over [t0, T], for a unit rate on step k.

    A unit rate on step k adds h^2/2 inside the step and h to the stock for
    every remaining step.
    """
    h = step_length(spec, M)
    remaining = np.cumsum(np.full(M, h)[::-1])[::-1] - h
    return h * remaining + 0.5 * h * h


def _check_box(spec: GameSpec, u: np.ndarray) -> None:
    if u.shape[0] != spec.n:
        raise InvalidControlError(f"control has {u.shape[0]} rows for {spec.n} players")
    caps = spec.b[:, None]
    if np.any(u < 0.0) or np.any(u > caps):
        i = int(np.argwhere((u < 0.0) | (u > caps))[0][0])
        raise InvalidControlError(f"control of player {i} leaves its box [0, {spec.b[i]}]")


def stock_path(spec: GameSpec, u: DiscretizedControl) -> np.ndarray:
    """Stock at the M + 1 grid nodes."""
    h = step_length(spec, u.M)
    rate = u.values.sum(axis=0)
    return spec.x0 + np.concatenate(([0.0], np.cumsum(rate * h)))


def integrate_payoffs(spec: GameSpec, u: DiscretizedControl) -> np.ndarray:
    _check_box(spec, u.values)
    h = step_length(spec, u.M)
    x = stock_path(spec, u)
    stock_integral = np.sum(0.5 * h * (x[:-1] + x[1:]))
    b = spec.b[:, None]
    revenue = h * np.sum(b * u.values - 0.5 * u.values ** 2, axis=1)
    return revenue - spec.d * stock_integral


def _optimize_steps(spec: GameSpec, u: np.ndarray, movers: Coalition, objective: Coalition,
                    sense: str) -> np.ndarray:
    """Re-choose the rows of ``movers`` to max/min the objective coalition's payoff."""
    M = u.shape[1]
    h = step_length(spec, M)
    w = _stock_weights(spec, M)
    D_W = sum(spec.players[j].d for j in objective.members)
    out = u.copy()
    for i in movers.members:
        cap = spec.players[i].b
        own = i in objective
        c = h if own else 0.0
        a = (h * cap if own else 0.0) - D_W * w
        if sense == "max":
            if c > 0:
                v = np.clip(a / c, 0.0, cap)
            else:
                v = np.where(a > 0, cap, np.where(a < 0, 0.0, u[i]))
        else:
            if c > 0:
                at_cap = a * cap - 0.5 * c * cap * cap
                v = np.where(at_cap < 0.0, cap, 0.0)
            else:
                v = np.where(a < 0, cap, np.where(a > 0, 0.0, u[i]))
        out[i] = v
    return out


def _as_array(spec: GameSpec, fixed: DiscretizedControl | None, M: int | None) -> np.ndarray:
    if fixed is None:
        if M is None:
            raise ValueError("either a fixed control or M is required")
        return np.zeros((spec.n, M))
    if M is not None and fixed.M != M:
        raise ValueError(f"fixed control has M={fixed.M}, expected {M}")
    _check_box(spec, fixed.values)
    return np.array(fixed.values)


def _coalition_value(spec: GameSpec, u: np.ndarray, S: Coalition) -> float:
    J = integrate_payoffs(spec, DiscretizedControl(u.shape[1], u))
    return float(sum(J[i] for i in S.members))


def oracle_min_complement(spec: GameSpec, S: Coalition, fixed_S: DiscretizedControl | None = None,
                          M: int | None = None) -> OracleResult:
    """Complement minimizes the coalition's total payoff; coalition rows stay fixed."""
    u0 = _as_array(spec, fixed_S, M)
    u = _optimize_steps(spec, u0, S.complement(spec.n), S, "min")
    return OracleResult(_coalition_value(spec, u, S), DiscretizedControl(u.shape[1], u), 1,
                        float(np.max(np.abs(u - u0), initial=0.0)))


def oracle_max_coalition(spec: GameSpec, S: Coalition, fixed_complement: DiscretizedControl | None = None,
                         M: int | None = None) -> OracleResult:
    """Coalition maximizes its total payoff; complement rows stay fixed."""
    u0 = _as_array(spec, fixed_complement, M)
    u = _optimize_steps(spec, u0, S, S, "max")
    return OracleResult(_coalition_value(spec, u, S), DiscretizedControl(u.shape[1], u), 1,
                        float(np.max(np.abs(u - u0), initial=0.0)))


def oracle_nash(spec: GameSpec, M: int = DEFAULT_M, max_sweeps: int = 50, tol: float = 1e-10) -> OracleResult:
    """Synchronous iterated best response from zero emissions."""
    u = np.zeros((spec.n, M))
    residual = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        new = np.empty_like(u)
        for i in range(spec.n):
            me = Coalition(1 << i)
            new[i] = _optimize_steps(spec, u, me, me, "max")[i]
        residual = float(np.max(np.abs(new - u)))
        u = new
        sweeps += 1
        if residual < tol:
            break
    control = DiscretizedControl(M, u)
    J = integrate_payoffs(spec, control)
    return OracleResult(tuple(float(v) for v in J), control, sweeps, residual,
                        {"converged": residual < tol})


def best_response_change(spec: GameSpec, control: DiscretizedControl, i: int) -> float:
    me = Coalition(1 << i)
    u = np.array(control.values)
    return float(np.max(np.abs(_optimize_steps(spec, u, me, me, "max")[i] - u[i])))


@lru_cache(maxsize=64)
def _nash_controls(spec: GameSpec, M: int) -> DiscretizedControl:
    return oracle_nash(spec, M).control


@lru_cache(maxsize=64)
def _coop_controls(spec: GameSpec, M: int) -> DiscretizedControl:
    return oracle_max_coalition(spec, spec.grand, None, M).control


def _max_min(spec: GameSpec, S: Coalition, M: int, max_sweeps: int = 50, tol: float = 1e-12) -> OracleResult:
    """Lower value: the complement reacts to the coalition's controls."""
    comp = S.complement(spec.n)
    u = _optimize_steps(spec, np.zeros((spec.n, M)), comp, S, "min")
    before = u[list(comp.members)].copy()
    residual, sweeps = np.inf, 0
    while sweeps < max_sweeps and residual >= tol:
        new = _optimize_steps(spec, u, S, S, "max")
        new = _optimize_steps(spec, new, comp, S, "min")
        residual = float(np.max(np.abs(new - u)))
        u, sweeps = new, sweeps + 1
    after = u[list(comp.members)]
    return OracleResult(_coalition_value(spec, u, S), DiscretizedControl(M, u), sweeps, residual,
                        {"complement_before": before, "complement_after": after.copy()})


def _min_max(spec: GameSpec, S: Coalition, M: int, max_sweeps: int = 50, tol: float = 1e-12) -> OracleResult:
    """Upper value: the coalition reacts to the complement's controls.

    The inner maximum is linear in the complement's controls (envelope
    argument), so the outer minimization is again per-step.
    """
    comp = S.complement(spec.n)
    u = np.zeros((spec.n, M))
    residual, sweeps = np.inf, 0
    while sweeps < max_sweeps and residual >= tol:
        new = _optimize_steps(spec, u, S, S, "max")
        new = _optimize_steps(spec, new, comp, S, "min")
        new = _optimize_steps(spec, new, S, S, "max")
        residual = float(np.max(np.abs(new - u)))
        u, sweeps = new, sweeps + 1
    return OracleResult(_coalition_value(spec, u, S), DiscretizedControl(M, u), sweeps, residual)


def oracle_cf(spec: GameSpec, kind, S: Coalition, M: int = DEFAULT_M) -> OracleResult:
    kind = CFKind(kind)
    if kind is CFKind.eta_cover:
        raise ValueError("the oracle covers the five basic kinds")
    if S.mask == 0:
        return OracleResult(0.0, DiscretizedControl.zeros(spec.n, M), 0, 0.0)
    if kind is CFKind.alpha:
        return _max_min(spec, S, M)
    if kind is CFKind.beta:
        return _min_max(spec, S, M)
    if kind is CFKind.delta:
        return oracle_max_coalition(spec, S, _nash_controls(spec, M))
    coop = _coop_controls(spec, M).values
    if kind is CFKind.zeta:
        return oracle_min_complement(spec, S, DiscretizedControl(M, coop))
    # eta: nobody optimizes
    rows = np.array([i in S for i in range(spec.n)])
    u = np.where(rows[:, None], coop, _nash_controls(spec, M).values)
    return OracleResult(_coalition_value(spec, u, S), DiscretizedControl(M, u), 0, 0.0)


@dataclass(frozen=True)
class ValidationEntry:
    kind: CFKind
    coalition: Coalition
    oracle: float
    closed_form: float
    error: float  # |oracle - closed| / (1 + |closed|)


@dataclass(frozen=True)
class ValidationMatrix:
    entries: tuple[ValidationEntry, ...]
    M: int
    rel_tol: float

    @property
    def worst(self) -> ValidationEntry:
        return max(self.entries, key=lambda e: e.error)

    @property
    def max_error(self) -> float:
        return self.worst.error

    @property
    def passed(self) -> bool:
        return self.max_error < self.rel_tol


def relative_error(approx: float, exact: float) -> float:
    return abs(approx - exact) / (1.0 + abs(exact))


def validate_against_closed_forms(spec: GameSpec, M: int = DEFAULT_M, rel_tol: float = 1e-3,
                                  kinds=BASIC_KINDS) -> ValidationMatrix:
    if spec.n > VALIDATION_MAX_PLAYERS:
        raise CapacityError(f"full validation is limited to n <= {VALIDATION_MAX_PLAYERS}")
    out = []
    for kind in kinds:
        for m in range(1 << spec.n):
            S = Coalition(m)
            exact = cf_value(spec, kind, S, spec.x0, spec.t0)
            approx = oracle_cf(spec, kind, S, M).value
            out.append(ValidationEntry(CFKind(kind), S, approx, exact, relative_error(approx, exact)))
    return ValidationMatrix(tuple(out), M, rel_tol)
