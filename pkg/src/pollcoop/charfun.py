"""Closed-form characteristic functions of the pollution game.

Every kind shares the same terms up to second order in the time-to-go
``h = T - t``::

    V(S) = -D_S h x + Btilde_S h / 2 - B_N D_S h^2 / 2 + c_kind(S) h^3 / 6

and differs only in the cubic coefficient ``c_kind``. Gaps between kinds are
therefore computed from coefficient differences, which keeps them free of
cancellation against the shared part.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import CapacityError, DomainError, StructuralError
from .game import (MAX_PLAYERS, Coalition, GameSpec, aggregate_arrays, check_coalition,
                   coalition_aggregates, require_valid)

COVER_MAX_PLAYERS = 15


class CFKind(str, enum.Enum):
    alpha = "alpha"
    beta = "beta"
    delta = "delta"
    zeta = "zeta"
    eta = "eta"
    eta_cover = "eta_cover"

    def __str__(self):
        return self.value


BASIC_KINDS = (CFKind.alpha, CFKind.beta, CFKind.delta, CFKind.zeta, CFKind.eta)

# Beta evaluates through the alpha closed form: the coalition's and the
# complement's optimal controls are decoupled in this game, so max-min and
# min-max coincide. The numeric oracle computes beta with the order swapped.
BETA_DELEGATES_TO_ALPHA = True


def _kind(kind) -> CFKind:
    return kind if isinstance(kind, CFKind) else CFKind(kind)


def _cubic(kind: CFKind, s, D_S, D_c, D_N):
    """Coefficient of h^3/6. Works on scalars and arrays alike."""
    if kind in (CFKind.alpha, CFKind.beta):
        return s * D_S * D_S
    if kind is CFKind.delta:
        return 2.0 * D_c * D_S + s * D_S * D_S
    if kind is CFKind.zeta:
        return -(s * D_N * (D_N - 2.0 * D_S))
    if kind is CFKind.eta:
        return 2.0 * s * D_N * D_S + 2.0 * D_c * D_S - s * D_N * D_N
    raise ValueError(f"no closed form for {kind}")


def _shared(Bt_S, D_S, B_N, x, h):
    return -D_S * h * x + 0.5 * Bt_S * h - 0.5 * B_N * D_S * h * h


def _grand_value(n, Bt_N, B_N, D_N, x, h):
    return _shared(Bt_N, D_N, B_N, x, h) + n * D_N * D_N * h ** 3 / 6.0


def _horizon(spec: GameSpec, t: float) -> float:
    if t > spec.T:
        raise DomainError(f"t={t} is after the end of the game T={spec.T}")
    return spec.T - t


def cf_value(spec: GameSpec, kind, S: Coalition, x: float, t: float) -> float:
    kind = _kind(kind)
    if kind is CFKind.eta_cover:
        raise ValueError("eta_cover is defined on whole tables; use cf_table")
    require_valid(spec)
    h = _horizon(spec, t)
    check_coalition(spec, S)
    if S.mask == 0:
        return 0.0
    N = spec.grand
    agg_N = coalition_aggregates(spec, N)
    if S == N:
        return _grand_value(spec.n, agg_N.Btilde, agg_N.B, agg_N.D, x, h)
    agg = coalition_aggregates(spec, S)
    D_c = coalition_aggregates(spec, S.complement(spec.n)).D
    return _shared(agg.Btilde, agg.D, agg_N.B, x, h) + _cubic(kind, agg.s, agg.D, D_c, agg_N.D) * h ** 3 / 6.0


@dataclass(frozen=True)
class CFTable:
    kind: CFKind
    x: float
    t: float
    n: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __getitem__(self, S) -> float:
        return float(self.values[S.mask if isinstance(S, Coalition) else S])

    def __len__(self):
        return len(self.values)

    def __iter__(self) -> Iterator[tuple[Coalition, float]]:
        return ((Coalition(m), float(v)) for m, v in enumerate(self.values))

    @property
    def grand_value(self) -> float:
        return float(self.values[-1])

    def singletons(self) -> np.ndarray:
        return self.values[1 << np.arange(self.n)]

    def replace(self, values, kind=None) -> "CFTable":
        return CFTable(self.kind if kind is None else kind, self.x, self.t, self.n, values)

    def check_complete(self) -> None:
        if self.n < 1 or self.values.shape != (1 << self.n,):
            raise StructuralError(f"table for n={self.n} must have {1 << self.n} entries, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise StructuralError("table has non-finite entries")
        if self.values[0] != 0.0:
            raise StructuralError("V(empty) must be 0")


def cf_table(spec: GameSpec, kind, x: float | None = None, t: float | None = None) -> CFTable:
    kind = _kind(kind)
    x = spec.x0 if x is None else float(x)
    t = spec.t0 if t is None else float(t)
    if kind is CFKind.eta_cover:
        if spec.n > COVER_MAX_PLAYERS:
            raise CapacityError(f"eta_cover is limited to n <= {COVER_MAX_PLAYERS}")
        cov = superadditive_cover(cf_table(spec, CFKind.eta, x, t))
        return CFTable(CFKind.eta_cover, cov.x, cov.t, cov.n, cov.values)
    if spec.n > MAX_PLAYERS:
        raise CapacityError(f"n={spec.n} exceeds the cap of {MAX_PLAYERS} players")
    require_valid(spec)
    h = _horizon(spec, t)
    agg = aggregate_arrays(spec)
    full = (1 << spec.n) - 1
    D_N, B_N, Bt_N = agg["D"][full], agg["B"][full], agg["Btilde"][full]
    D_c = agg["D"][full ^ np.arange(full + 1)]
    s = agg["s"].astype(float)
    values = _shared(agg["Btilde"], agg["D"], B_N, x, h) + _cubic(kind, s, agg["D"], D_c, D_N) * h ** 3 / 6.0
    values[0] = 0.0
    values[full] = _grand_value(spec.n, Bt_N, B_N, D_N, x, h)
    return CFTable(kind, x, t, spec.n, values)


def _submasks(S: int) -> np.ndarray:
    """All submasks of S as an array, in increasing order."""
    members = [i for i in range(S.bit_length()) if S >> i & 1]
    k = len(members)
    idx = np.arange(1 << k, dtype=np.int64)
    out = np.zeros(1 << k, dtype=np.int64)
    for j, m in enumerate(members):
        out |= ((idx >> j) & 1) << m
    return out


def superadditive_cover(table: CFTable) -> CFTable:
    """Largest value over all partitions of each coalition, by subset DP.

    For each S, only submasks T containing the lowest member of S are
    tried, so each unordered split {T, S\\T} is visited once.
    """
    table.check_complete()
    n = table.n
    cover = np.array(table.values, dtype=float)
    # proper submasks of S are smaller integers, so they are final before S
    for S in range(1, 1 << n):
        if S & (S - 1) == 0:
            continue
        low = S & -S
        rest = S ^ low
        subs = _submasks(rest)
        # T = low | sub with sub a proper submask of rest
        T = low | subs[:-1]
        best = np.max(cover[T] + cover[S ^ T])
        if best > cover[S]:
            cover[S] = best
    return table.replace(cover)


def partitions(items: list[int]):
    """All set partitions of ``items`` (lists of blocks)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]


def cover_by_enumeration(table: CFTable) -> CFTable:
    """Reference cover: brute force over every partition of every coalition."""
    table.check_complete()
    out = np.zeros(len(table.values))
    for m in range(1, len(out)):
        members = Coalition(m).members
        best = -np.inf
        for part in partitions(list(members)):
            total = 0.0
            for block in sorted(Coalition.from_members(b).mask for b in part):
                total += table.values[block]
            best = max(best, total)
        out[m] = best
    return table.replace(out)


@dataclass(frozen=True)
class BoundsGap:
    upper_gap: float  # V_delta(S) - V_kind(S)
    lower_gap: float  # V_kind(S) - V_zeta(S)


def distances(spec: GameSpec, kind, S: Coalition, t: float) -> BoundsGap:
    """Distance of ``kind`` to the delta (upper) and zeta (lower) bounds.

    The x-dependent and lower-order terms are common to all kinds and cancel,
    so neither the stock level nor anything but h = T - t enters.
    """
    kind = _kind(kind)
    if kind is CFKind.eta_cover:
        raise ValueError("distances are defined for the five basic kinds")
    require_valid(spec)
    h = _horizon(spec, t)
    check_coalition(spec, S)
    if S.mask == 0 or S == spec.grand:
        return BoundsGap(0.0, 0.0)
    agg = coalition_aggregates(spec, S)
    D_c = coalition_aggregates(spec, S.complement(spec.n)).D
    D_N = coalition_aggregates(spec, spec.grand).D
    c = {k: _cubic(k, agg.s, agg.D, D_c, D_N) for k in (kind, CFKind.delta, CFKind.zeta)}
    scale = h ** 3 / 6.0
    return BoundsGap((c[CFKind.delta] - c[kind]) * scale, (c[kind] - c[CFKind.zeta]) * scale)


@dataclass(frozen=True)
class Alignment:
    k_eta: float
    k_alpha: float


def alignment_coefficient(spec: GameSpec, S: Coalition) -> Alignment:
    """Weight of the delta bound when eta is written as a mix of delta and zeta."""
    check_coalition(spec, S)
    if S.mask == 0:
        raise DomainError("alignment coefficient is undefined for the empty coalition")
    agg = coalition_aggregates(spec, S)
    D_c = coalition_aggregates(spec, S.complement(spec.n)).D
    denom = 2.0 * agg.D + agg.s * D_c
    if not denom > 0:
        raise DomainError(f"degenerate alignment denominator {denom}")
    k = 2.0 * agg.D / denom
    return Alignment(k, agg.s * D_c / denom)


@dataclass(frozen=True)
class OrderViolation:
    upper: CFKind
    lower: CFKind
    coalition: Coalition
    gap: float  # V_upper - V_lower, negative beyond tolerance


@dataclass(frozen=True)
class OrderReport:
    violations: tuple[OrderViolation, ...]
    checked: int

    @property
    def passed(self) -> bool:
        return not self.violations


# (upper, lower) pairs: the five inequalities of the partial order, the one
# following by transitivity (beta >= zeta) and beta >= alpha.
ORDER_PAIRS = (
    (CFKind.delta, CFKind.alpha),
    (CFKind.alpha, CFKind.zeta),
    (CFKind.delta, CFKind.beta),
    (CFKind.beta, CFKind.zeta),
    (CFKind.delta, CFKind.eta),
    (CFKind.eta, CFKind.zeta),
    (CFKind.beta, CFKind.alpha),
)


def verify_partial_order(spec: GameSpec, x: float, t: float, tol: float = 1e-9,
                         tables: dict | None = None) -> OrderReport:
    tables = tables or {k: cf_table(spec, k, x, t) for k in BASIC_KINDS}
    out = []
    checked = 0
    for hi, lo in ORDER_PAIRS:
        gap = tables[hi].values - tables[lo].values
        checked += len(gap)
        for m in np.flatnonzero(gap < -tol):
            out.append(OrderViolation(hi, lo, Coalition(int(m)), float(gap[m])))
    return OrderReport(tuple(out), checked)


@dataclass(frozen=True)
class SuperadditivityViolation:
    S: Coalition
    Q: Coalition
    gap: float  # V(S u Q) - V(S) - V(Q)


@dataclass(frozen=True)
class SuperadditivityReport:
    violations: tuple[SuperadditivityViolation, ...]
    pairs_checked: int
    min_gap: float

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_superadditivity(table: CFTable, tol: float = 1e-9) -> SuperadditivityReport:
    """Check V(S u Q) >= V(S) + V(Q) - tol over all unordered disjoint pairs."""
    table.check_complete()
    V = table.values
    full = len(V) - 1
    out = []
    pairs = 0
    min_gap = np.inf
    for S in range(1, full + 1):
        rest = full ^ S
        # Q ranges over nonempty submasks of the complement with Q > S
        Q = _submasks(rest)[1:]
        Q = Q[Q > S]
        if not len(Q):
            continue
        gap = V[S | Q] - V[S] - V[Q]
        pairs += len(Q)
        min_gap = min(min_gap, float(gap.min()))
        for j in np.flatnonzero(gap < -tol):
            out.append(SuperadditivityViolation(Coalition(S), Coalition(int(Q[j])), float(gap[j])))
    return SuperadditivityReport(tuple(out), pairs, float(min_gap) if pairs else 0.0)
