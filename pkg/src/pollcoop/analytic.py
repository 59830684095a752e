"""Closed-form open-loop strategies, trajectories and payoffs.

Every control here is affine in time-to-go ``r = T - t``:
``u(t) = clamp(c0 - c1 * r, 0, cap)``. Under the regularity constraint the
clamp never binds, so trajectories are quadratic in ``t`` and payoffs are
polynomials that can be integrated exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError, UnsupportedProfileError
from .game import GameSpec, require_valid


@dataclass(frozen=True)
class AffineControl:
    cap: float
    c0: float
    c1: float

    def raw(self, time_to_go):
        return self.c0 - self.c1 * np.asarray(time_to_go, dtype=float)

    def at(self, time_to_go):
        return np.clip(self.raw(time_to_go), 0.0, self.cap)

    def clipping_inactive(self, horizon: float) -> bool:
        # affine in r, so the endpoints r=0 and r=horizon decide
        lo, hi = self.c0, self.c0 - self.c1 * horizon
        return 0.0 <= min(lo, hi) and max(lo, hi) <= self.cap


@dataclass(frozen=True)
class ControlProfile:
    T: float
    controls: tuple[AffineControl, ...]

    def __len__(self):
        return len(self.controls)

    def at_time(self, t) -> np.ndarray:
        return np.array([c.at(self.T - t) for c in self.controls])


@dataclass(frozen=True)
class Trajectory:
    """x(t) = x0 + a1 (t - t0) + a2 (t^2 - t0^2)."""

    x0: float
    t0: float
    a1: float
    a2: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.x0 + self.a1 * (t - self.t0) + self.a2 * (t * t - self.t0 * self.t0)


def nash_equilibrium(spec: GameSpec) -> ControlProfile:
    require_valid(spec)
    return ControlProfile(spec.T, tuple(AffineControl(p.b, p.b, p.d) for p in spec.players))


def cooperative_agreement(spec: GameSpec) -> ControlProfile:
    require_valid(spec)
    D_N = sum(p.d for p in spec.players)
    return ControlProfile(spec.T, tuple(AffineControl(p.b, p.b, D_N) for p in spec.players))


def _require_interior(spec: GameSpec, profile: ControlProfile) -> None:
    if len(profile) != spec.n:
        raise ValueError(f"profile has {len(profile)} controls for {spec.n} players")
    horizon = spec.T - spec.t0
    for i, c in enumerate(profile.controls):
        if not c.clipping_inactive(horizon):
            raise UnsupportedProfileError(
                f"control of player {i} leaves [0, {c.cap}] on [t0, T]; use the numeric oracle")


def state_trajectory(spec: GameSpec, profile: ControlProfile) -> Trajectory:
    _require_interior(spec, profile)
    # xdot = sum_i (c0_i - c1_i (T - t)) = (C0 - C1 T) + C1 t
    C0 = sum(c.c0 for c in profile.controls)
    C1 = sum(c.c1 for c in profile.controls)
    return Trajectory(spec.x0, spec.t0, C0 - C1 * spec.T, C1 / 2.0)


def player_payoff(spec: GameSpec, profile: ControlProfile, i: int) -> float:
    """Exact integral of b u - u^2/2 - d x along the profile's trajectory.

    The integrand is written as a polynomial in time-to-go r and integrated
    over r in [0, T - t0].
    """
    _require_interior(spec, profile)
    H = spec.T - spec.t0
    C0 = sum(c.c0 for c in profile.controls)
    C1 = sum(c.c1 for c in profile.controls)
    # x(r) = x0 + C0 (H - r) - C1 (H^2 - r^2) / 2
    x = Polynomial([spec.x0 + C0 * H - C1 * H * H / 2.0, -C0, C1 / 2.0])
    c = profile.controls[i]
    p = spec.players[i]
    u = Polynomial([c.c0, -c.c1])
    integrand = p.b * u - 0.5 * u * u - p.d * x
    F = integrand.integ()
    return float(F(H) - F(0.0))


def pollution_gap(spec: GameSpec, t: float) -> float:
    """x_NE(t) - x_coop(t), non-negative on [t0, T]."""
    if not spec.t0 <= t <= spec.T:
        raise DomainError(f"t={t} outside [{spec.t0}, {spec.T}]")
    D_N = sum(p.d for p in spec.players)
    return 0.5 * (spec.n - 1) * D_N * (t - spec.t0) * (2 * spec.T - t - spec.t0)
