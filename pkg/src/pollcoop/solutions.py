"""Shapley values, imputation vertices and rationality checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .charfun import BASIC_KINDS, CFKind, CFTable, cf_table
from .errors import DegenerateImputationSetError, DomainError
from .game import GameSpec, require_valid


@dataclass(frozen=True)
class Imputation:
    payoffs: tuple[float, ...]

    @classmethod
    def of(cls, values) -> "Imputation":
        return cls(tuple(float(v) for v in values))

    def __len__(self):
        return len(self.payoffs)

    def __getitem__(self, i):
        return self.payoffs[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.payoffs)


@lru_cache(maxsize=None)
def _weights(n: int) -> np.ndarray:
    # index s = coalition size including the player
    w = [0.0] + [float(Fraction(factorial(n - s) * factorial(s - 1), factorial(n))) for s in range(1, n + 1)]
    return np.array(w)


@lru_cache(maxsize=8)
def _popcount(n: int) -> np.ndarray:
    pc = np.zeros(1 << n, dtype=np.int64)
    for k in range(n):
        pc[1 << k:1 << (k + 1)] = pc[:1 << k] + 1
    return pc


def shapley(table: CFTable) -> Imputation:
    table.check_complete()
    n = table.n
    V = table.values
    w = _weights(n)
    pc = _popcount(n)
    masks = np.arange(1 << n)
    out = []
    for i in range(n):
        S = masks[(masks >> i) & 1 == 1]
        out.append(float(np.sum(w[pc[S]] * (V[S] - V[S ^ (1 << i)]))))
    return Imputation.of(out)


def shapley_closed_form(spec: GameSpec, family: str = "zeta_eta", x: float | None = None,
                        t: float | None = None, variant: str = "general") -> Imputation:
    """Shapley vector shared by the zeta and eta functions, in closed form.

    The cubic term is ``n D_N d_i h^3 / 6``. ``variant="printed"`` uses the
    published coefficient ``1/3`` instead, which agrees only for two players.
    """
    if family != "zeta_eta":
        raise ValueError("closed form is available only for the zeta/eta family")
    if variant not in ("general", "printed"):
        raise ValueError(f"unknown variant {variant!r}")
    require_valid(spec)
    x = spec.x0 if x is None else x
    t = spec.t0 if t is None else t
    if t > spec.T:
        raise DomainError(f"t={t} is after T={spec.T}")
    h = spec.T - t
    b, d = spec.b, spec.d
    B_N, D_N = float(sum(b)), float(sum(d))
    cubic = spec.n / 6.0 if variant == "general" else 1.0 / 3.0
    sh = -d * h * x + 0.5 * b * b * h - 0.5 * B_N * d * h * h + cubic * D_N * d * h ** 3
    return Imputation.of(sh)


def printed_alpha_shapley_n3(spec: GameSpec, x: float | None = None, t: float | None = None) -> Imputation:
    """The published three-player display for the alpha/delta Shapley vector."""
    if spec.n != 3:
        raise ValueError("the printed alpha/delta display covers three players only")
    x = spec.x0 if x is None else x
    t = spec.t0 if t is None else t
    h = spec.T - t
    b, d = spec.b, spec.d
    B_N = float(sum(b))
    out = []
    for i in range(3):
        j, k = [m for m in range(3) if m != i]
        di, dj, dk = d[i], d[j], d[k]
        poly = (di * di + dj * dj / 4 + dk * dk / 4 + 4 / 3 * di * dj + 4 / 3 * di * dk + dj * dk / 3) / 3
        out.append(-di * h * x + 0.5 * b[i] ** 2 * h - 0.5 * B_N * di * h * h + poly * h ** 3)
    return Imputation.of(out)


def imputation_vertices(table: CFTable) -> list[Imputation]:
    table.check_complete()
    v = table.singletons()
    total = float(np.sum(v))
    surplus = table.grand_value - total
    if surplus < 0:
        raise DegenerateImputationSetError(-surplus)
    out = []
    for k in range(table.n):
        xi = v.copy()
        xi[k] = table.grand_value - (total - v[k])
        out.append(Imputation.of(xi))
    return out


@dataclass(frozen=True)
class RationalityReport:
    slacks: tuple[float, ...]      # xi_i - V({i})
    residual: float                # sum(xi) - V(N)
    violating_players: tuple[int, ...]
    group_ok: bool

    @property
    def valid(self) -> bool:
        return self.group_ok and not self.violating_players


def check_imputation(table: CFTable, xi: Imputation, tol: float = 1e-9) -> RationalityReport:
    if len(xi) != table.n:
        raise ValueError(f"imputation has {len(xi)} components for {table.n} players")
    p = xi.as_array()
    slack = p - table.singletons()
    residual = float(p.sum() - table.grand_value)
    bad = tuple(int(i) for i in np.flatnonzero(slack < -tol))
    return RationalityReport(tuple(float(s) for s in slack), residual, bad, abs(residual) <= tol)


@dataclass(frozen=True)
class ShapleyComparisonReport:
    vectors: dict               # kind -> Imputation
    alpha_delta_deviation: float
    zeta_eta_deviation: float
    efficiency_residuals: dict  # kind -> sum(Sh) - V(N)
    closed_form_deviation: float          # general-n zeta/eta closed form vs combinatorial
    printed_closed_form_deviation: float  # published coefficient vs combinatorial
    printed_n3_alpha_deviation: float | None
    tol: float

    @property
    def passed(self) -> bool:
        return (self.alpha_delta_deviation <= self.tol and self.zeta_eta_deviation <= self.tol
                and all(abs(r) <= self.tol for r in self.efficiency_residuals.values()))


def _maxdev(a: Imputation, b: Imputation) -> float:
    return float(np.max(np.abs(a.as_array() - b.as_array())))


def compare_shapley(spec: GameSpec, x: float | None = None, t: float | None = None,
                    tol: float = 1e-9, tables: dict | None = None) -> ShapleyComparisonReport:
    x = spec.x0 if x is None else x
    t = spec.t0 if t is None else t
    tables = tables or {k: cf_table(spec, k, x, t) for k in BASIC_KINDS}
    vec = {k: shapley(tables[k]) for k in BASIC_KINDS}
    eff = {k: float(sum(vec[k].payoffs) - tables[k].grand_value) for k in BASIC_KINDS}
    general = shapley_closed_form(spec, x=x, t=t)
    printed = shapley_closed_form(spec, x=x, t=t, variant="printed")
    n3 = _maxdev(printed_alpha_shapley_n3(spec, x, t), vec[CFKind.alpha]) if spec.n == 3 else None
    return ShapleyComparisonReport(
        vectors=vec,
        alpha_delta_deviation=_maxdev(vec[CFKind.alpha], vec[CFKind.delta]),
        zeta_eta_deviation=_maxdev(vec[CFKind.zeta], vec[CFKind.eta]),
        efficiency_residuals=eff,
        closed_form_deviation=max(_maxdev(general, vec[CFKind.zeta]), _maxdev(general, vec[CFKind.eta])),
        printed_closed_form_deviation=_maxdev(printed, vec[CFKind.zeta]),
        printed_n3_alpha_deviation=n3,
        tol=tol,
    )
