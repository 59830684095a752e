"""Parameters of the n-player pollution game and coalition bookkeeping.

Coalitions are unsigned-integer bitmasks: bit ``i`` set means player ``i``
belongs to the coalition. Enumeration order is the natural integer order, so
a table of coalition values is just an array indexed by mask.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapacityError, InvalidCoalitionError, InvalidSpecError

MAX_PLAYERS = 24


@dataclass(frozen=True)
class PlayerParams:
    id: int
    b: float  # emission cap and revenue coefficient
    d: float  # marginal damage per unit of stock


@dataclass(frozen=True)
class GameSpec:
    t0: float
    T: float
    x0: float
    players: tuple[PlayerParams, ...]

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))

    @classmethod
    def from_arrays(cls, b: Sequence[float], d: Sequence[float], *, t0: float = 0.0,
                    T: float = 1.0, x0: float = 0.0) -> "GameSpec":
        if len(b) != len(d):
            raise ValueError("b and d must have the same length")
        players = tuple(PlayerParams(i, float(bi), float(di)) for i, (bi, di) in enumerate(zip(b, d)))
        return cls(float(t0), float(T), float(x0), players)

    @property
    def n(self) -> int:
        return len(self.players)

    @property
    def b(self) -> np.ndarray:
        return np.array([p.b for p in self.players], dtype=float)

    @property
    def d(self) -> np.ndarray:
        return np.array([p.d for p in self.players], dtype=float)

    @property
    def grand(self) -> "Coalition":
        return Coalition((1 << self.n) - 1)

    def with_initial(self, x0: float, t0: float) -> "GameSpec":
        """The subgame starting from stock ``x0`` at time ``t0``."""
        return GameSpec(float(t0), self.T, float(x0), self.players)


@dataclass(frozen=True, order=True)
class Coalition:
    mask: int

    def __post_init__(self):
        if self.mask < 0:
            raise InvalidCoalitionError(f"negative coalition mask {self.mask}")

    @classmethod
    def from_members(cls, members: Iterable[int]) -> "Coalition":
        mask = 0
        for i in members:
            if i < 0:
                raise InvalidCoalitionError(f"negative player index {i}")
            mask |= 1 << i
        return cls(mask)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.mask.bit_length()) if self.mask >> i & 1)

    @property
    def size(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return self.size

    def complement(self, n: int) -> "Coalition":
        return Coalition(((1 << n) - 1) & ~self.mask)

    def union(self, other: "Coalition") -> "Coalition":
        return Coalition(self.mask | other.mask)

    def isdisjoint(self, other: "Coalition") -> bool:
        return not (self.mask & other.mask)

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self.members)) + "}"


@dataclass(frozen=True)
class Aggregates:
    B: float        # sum of b over the coalition
    Btilde: float   # sum of b squared
    D: float        # sum of d
    s: int          # coalition size

    def __add__(self, other: "Aggregates") -> "Aggregates":
        return Aggregates(self.B + other.B, self.Btilde + other.Btilde, self.D + other.D, self.s + other.s)


@dataclass(frozen=True)
class Violation:
    field: str
    player: int | None
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def validate_spec(spec: GameSpec) -> ValidationReport:
    """List every violated constraint. Comparisons are exact on the inputs."""
    out: list[Violation] = []
    if not spec.players:
        out.append(Violation("players", None, "at least one player is required"))
    if not spec.T > spec.t0:
        out.append(Violation("T", None, f"T={spec.T} must exceed t0={spec.t0}"))
    if not spec.x0 >= 0:
        out.append(Violation("x0", None, f"x0={spec.x0} must be non-negative"))
    seen = set()
    for p in spec.players:
        if p.id in seen:
            out.append(Violation("id", p.id, f"duplicate player id {p.id}"))
        seen.add(p.id)
        if not p.b > 0:
            out.append(Violation("b", p.id, f"player {p.id}: b={p.b} must be positive"))
        if not p.d > 0:
            out.append(Violation("d", p.id, f"player {p.id}: d={p.d} must be positive"))
    if spec.players and spec.T > spec.t0:
        D_N = _ordered_sum(p.d for p in spec.players)
        need = D_N * (spec.T - spec.t0)
        for p in spec.players:
            if not p.b >= need:
                out.append(Violation(
                    "regularity", p.id,
                    f"player {p.id}: b={p.b:g} < D_N*(T-t0)={need:g} (regularity)"))
    return ValidationReport(tuple(out))


def require_valid(spec: GameSpec) -> None:
    report = validate_spec(spec)
    if not report.valid:
        raise InvalidSpecError(report)


def _ordered_sum(values: Iterable[float]) -> float:
    total = 0.0
    for v in values:
        total += v
    return total


def check_coalition(spec: GameSpec, S: Coalition) -> None:
    if S.mask >> spec.n:
        raise InvalidCoalitionError(f"coalition {S!r} has members outside 0..{spec.n - 1}")


def coalition_aggregates(spec: GameSpec, S: Coalition) -> Aggregates:
    check_coalition(spec, S)
    B = Bt = D = 0.0
    for i in S.members:
        p = spec.players[i]
        B += p.b
        Bt += p.b * p.b
        D += p.d
    return Aggregates(B, Bt, D, S.size)


def aggregate_arrays(spec: GameSpec) -> dict[str, np.ndarray]:
    """Aggregates for every mask at once, indexed by mask.

    Members are accumulated in ascending order, matching coalition_aggregates
    bit for bit.
    """
    n = spec.n
    if n > MAX_PLAYERS:
        raise CapacityError(f"n={n} exceeds the cap of {MAX_PLAYERS} players")
    size = 1 << n
    B = np.zeros(size)
    Bt = np.zeros(size)
    D = np.zeros(size)
    s = np.zeros(size, dtype=np.int64)
    for k, p in enumerate(spec.players):
        lo, hi = 1 << k, 1 << (k + 1)
        B[lo:hi] = B[:lo] + p.b
        Bt[lo:hi] = Bt[:lo] + p.b * p.b
        D[lo:hi] = D[:lo] + p.d
        s[lo:hi] = s[:lo] + 1
    return {"B": B, "Btilde": Bt, "D": D, "s": s}


def enumerate_coalitions(n: int, cap: int = MAX_PLAYERS) -> list[Coalition]:
    if n < 1:
        raise ValueError("need at least one player")
    if n > cap:
        raise CapacityError(f"n={n} exceeds the cap of {cap} players")
    return [Coalition(m) for m in range(1 << n)]


def random_regular_spec(rng: np.random.Generator, n: int, *, slack: float = 1.0) -> GameSpec:
    """Draw a spec that satisfies the regularity constraint.

    Caps are set to D_N*(T-t0) times a factor in [1, 1 + slack].
    """
    d = rng.uniform(0.01, 0.5, size=n)
    t0 = float(rng.uniform(0.0, 2.0))
    T = t0 + float(rng.uniform(0.25, 3.0))
    need = float(d.sum()) * (T - t0)
    b = need * (1.0 + rng.uniform(0.0, slack, size=n)) + 1e-9
    x0 = float(rng.uniform(0.0, 5.0))
    spec = GameSpec.from_arrays(b, d, t0=t0, T=T, x0=x0)
    require_valid(spec)
    return spec
