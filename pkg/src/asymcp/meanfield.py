"""Mean-field dynamics of the asymptomatic/symptomatic densities.

With ``u1``, ``u2`` the densities of states 1 and 2::

    u1' = (beta1 u1 + beta2 u2)(1 - u1 - u2) - (1 + gamma) u1
    u2' = gamma u1 - u2

Besides the disease-free point (0, 0) there is an interior equilibrium iff
``beta1 + gamma beta2 > 1 + gamma``, and it is then globally stable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StepSizeError

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class MeanFieldState:
    u1: float
    u2: float

    def __post_init__(self):
        if self.u1 < -SIMPLEX_TOL or self.u2 < -SIMPLEX_TOL or self.u1 + self.u2 > 1 + SIMPLEX_TOL:
            raise DomainError(f"({self.u1}, {self.u2}) is outside the simplex")

    def __iter__(self):
        return iter((self.u1, self.u2))


def _rates(p):
    return float(p.beta1), float(p.beta2), float(p.gamma)


def vector_field(u, p) -> tuple[float, float]:
    b1, b2, g = _rates(p)
    u1, u2 = u
    f1 = (b1 * u1 + b2 * u2) * (1.0 - u1 - u2) - (1.0 + g) * u1
    f2 = g * u1 - u2
    return f1, f2


def jacobian(u, p) -> np.ndarray:
    b1, b2, g = _rates(p)
    u1, u2 = u
    return np.array([
        [b1 * (1 - 2 * u1) - (b1 + b2) * u2 - (1 + g), b2 * (1 - 2 * u2) - (b1 + b2) * u1],
        [g, -1.0],
    ])


def stability_label(j: np.ndarray) -> str:
    """'stable' iff trace < 0 < det; non-hyperbolic points are 'degenerate'."""
    tr = float(j[0, 0] + j[1, 1])
    det = float(j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0])
    if det < 0:
        return "saddle"
    if det == 0 or tr == 0:
        return "degenerate"
    return "stable" if tr < 0 else "unstable"


@dataclass(frozen=True)
class FixedPointReport:
    p0: tuple[float, float]
    p12: tuple[float, float] | None
    survives: bool
    D1: float
    D2: float
    labels: dict
    trace: dict
    det: dict

    def as_dict(self) -> dict:
        return {
            "condition": self.survives,
            "D1": self.D1,
            "D2": self.D2,
            "p0": list(self.p0),
            "p12": list(self.p12) if self.p12 is not None else None,
            "trace": self.trace,
            "det": self.det,
            "labels": self.labels,
        }


def fixed_points(p) -> FixedPointReport:
    b1, b2, g = _rates(p)
    D1 = 1.0 + g
    D2 = b1 + g * b2
    survives = D2 > D1
    points = {"p0": (0.0, 0.0)}
    p12 = None
    if survives:
        u1 = 1.0 / D1 - 1.0 / D2
        p12 = (u1, g * u1)
        points["p12"] = p12
    labels, trace, det = {}, {}, {}
    for name, u in points.items():
        j = jacobian(u, p)
        trace[name] = float(j[0, 0] + j[1, 1])
        det[name] = float(j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0])
        labels[name] = stability_label(j)
    return FixedPointReport((0.0, 0.0), p12, survives, D1, D2, labels, trace, det)


def dulac_divergence(u, p) -> float:
    """Divergence of ``phi * F`` for the Dulac function ``phi = 1 / (u1 u2)``.

    Only defined in the open simplex; it is negative there for every choice
    of nonnegative rates, which rules out periodic orbits.
    """
    u1, u2 = u
    if not (u1 > 0 and u2 > 0 and u1 + u2 < 1):
        raise DomainError("the Dulac divergence is only defined in the open simplex")
    b1, b2, g = _rates(p)
    return -b2 * (1 - u1 - u2) / u1**2 - (b1 / u2 + b2 / u1) - g / u2**2


@dataclass
class MeanFieldTrajectory:
    times: np.ndarray
    states: np.ndarray
    converged_at: float | None

    @property
    def final(self) -> tuple[float, float]:
        return float(self.states[-1, 0]), float(self.states[-1, 1])

    def to_csv(self, every: int = 1) -> str:
        rows = ["t,u1,u2"]
        idx = list(range(0, len(self.times), every))
        if idx[-1] != len(self.times) - 1:
            idx.append(len(self.times) - 1)
        for i in idx:
            rows.append(",".join(repr(float(v)) for v in (self.times[i], *self.states[i])))
        return "\n".join(rows) + "\n"


def _clamp(u1, u2):
    if u1 < -SIMPLEX_TOL or u2 < -SIMPLEX_TOL or u1 + u2 > 1 + SIMPLEX_TOL:
        raise StepSizeError(f"integration left the simplex at ({u1}, {u2}); reduce dt")
    u1 = min(max(u1, 0.0), 1.0)
    u2 = min(max(u2, 0.0), 1.0)
    s = u1 + u2
    if s > 1.0:
        u1, u2 = u1 / s, u2 / s
    return u1, u2


def integrate(u0, p, t_max: float, dt: float = 1e-3, stop_on_convergence: bool = False) -> MeanFieldTrajectory:
    """Classical fixed-step RK4 from ``u0`` over ``[0, t_max]``.

    The state is checked against the simplex after every step and clamped
    when within ``1e-9``.  Convergence is declared at the first whole time
    unit over which the state moved by less than ``1e-12``; with
    ``stop_on_convergence`` the integration ends there.
    """
    if not dt > 0 or not t_max > 0:
        raise DomainError("dt and t_max must be positive")
    u = MeanFieldState(*u0)
    n = int(round(t_max / dt))
    if abs(n * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise DomainError("t_max must be a multiple of dt")
    per_unit = max(1, int(round(1.0 / dt)))
    b1, b2, g = _rates(p)

    def f(a, b):
        return (b1 * a + b2 * b) * (1.0 - a - b) - (1.0 + g) * a, g * a - b

    out = np.empty((n + 1, 2))
    u1, u2 = u.u1, u.u2
    out[0] = u1, u2
    last = (u1, u2)
    converged_at = None
    steps = n
    for i in range(1, n + 1):
        k1 = f(u1, u2)
        k2 = f(u1 + 0.5 * dt * k1[0], u2 + 0.5 * dt * k1[1])
        k3 = f(u1 + 0.5 * dt * k2[0], u2 + 0.5 * dt * k2[1])
        k4 = f(u1 + dt * k3[0], u2 + dt * k3[1])
        u1 += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        u2 += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        u1, u2 = _clamp(u1, u2)
        out[i] = u1, u2
        if i % per_unit == 0:
            if converged_at is None and max(abs(u1 - last[0]), abs(u2 - last[1])) < 1e-12:
                converged_at = i * dt
                if stop_on_convergence:
                    steps = i
                    break
            last = (u1, u2)
    times = np.arange(steps + 1) * dt
    return MeanFieldTrajectory(times, out[: steps + 1], converged_at)
