"""KKT system of the continuous complementarity reformulation of the knapsack game.

Each binary ``y_jl`` is relaxed to ``[0, 1]`` together with the equation
``y_jl (1 - y_jl) = 0``. Concatenating the players' first-order conditions
(shared caps carry one common multiplier per market) gives a system that
every feasible 0/1 point satisfies, so solving it says nothing about
equilibrium. This module builds the multipliers that prove it and finds
concrete non-equilibrium witnesses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .knapsack import KnapsackInstance, brute_force_regrets, feasible_points, is_feasible_point, verify_gne

GROUPS = ("stationarity", "budget", "binary", "upper", "lower", "shared")


class NoCounterexample(RuntimeError):
    """Every feasible point of the instance is an equilibrium."""


@dataclass
class KktCertificate:
    pi: np.ndarray  # (J,) budget rows, >= 0
    gamma: np.ndarray  # (J, L) y(1 - y) = 0 rows, free
    mu: np.ndarray  # (J, L) y <= 1, >= 0
    nu: np.ndarray  # (J, L) y >= 0, >= 0
    omega: np.ndarray  # (L,) shared caps, >= 0
    residuals: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pi": self.pi.tolist(),
            "gamma": self.gamma.tolist(),
            "mu": self.mu.tolist(),
            "nu": self.nu.tolist(),
            "omega": self.omega.tolist(),
            "residuals": dict(self.residuals),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _stationarity(inst: KnapsackInstance, Y: np.ndarray, cert: KktCertificate) -> np.ndarray:
    others = Y.sum(axis=0) - Y
    return (inst.alpha - inst.c - inst.beta * others - 2 * inst.beta * Y
            - cert.pi[:, None] * inst.a
            + cert.gamma - 2 * cert.gamma * Y
            - cert.mu + cert.nu
            - cert.omega[None, :] * inst.d)


def _complementarity(slack: np.ndarray, mult: np.ndarray) -> float:
    """Violation of ``0 <= slack  perp  mult >= 0``."""
    if slack.size == 0:
        return 0.0
    return float(max(np.max(-slack, initial=0.0), np.max(-mult, initial=0.0), np.max(np.abs(slack * mult))))


def kkt_residuals(inst: KnapsackInstance, y, cert: KktCertificate) -> dict[str, float]:
    """Largest violation in each equation group of the KKT system."""
    Y = inst.grid(y)
    J, L = inst.players, inst.markets
    shapes = {"pi": (J,), "gamma": (J, L), "mu": (J, L), "nu": (J, L), "omega": (L,)}
    for name, shape in shapes.items():
        if np.shape(getattr(cert, name)) != shape:
            raise ValueError(f"multiplier {name} has shape {np.shape(getattr(cert, name))}, expected {shape}")
    return {
        "stationarity": float(np.abs(_stationarity(inst, Y, cert)).max()),
        "budget": _complementarity(inst.b - (inst.a * Y).sum(axis=1), cert.pi),
        "binary": float(np.abs(cert.gamma * Y * (1 - Y)).max()),
        "upper": _complementarity(1 - Y, cert.mu),
        "lower": _complementarity(Y, cert.nu),
        "shared": _complementarity(inst.e - (inst.d * Y).sum(axis=0), cert.omega),
    }


def verify_kkt(inst: KnapsackInstance, y, cert: KktCertificate) -> float:
    """Max residual over all groups; see :func:`kkt_residuals` for the breakdown."""
    return max(kkt_residuals(inst, y, cert).values())


def construct_multipliers(inst: KnapsackInstance, y) -> KktCertificate:
    """Multipliers making any feasible 0/1 point a KKT point.

    Budget and cap multipliers are zero, the bound multipliers are zero,
    and ``gamma`` absorbs the whole marginal profit of each coordinate.
    """
    if not is_feasible_point(inst, y):
        raise ValueError("construct_multipliers needs a feasible 0/1 point")
    Y = np.round(inst.grid(y))
    J, L = inst.players, inst.markets
    pi = np.zeros(J)
    omega = np.zeros(L)
    mu = np.zeros((J, L))
    nu = np.zeros((J, L))
    others = Y.sum(axis=0) - Y
    margin = inst.alpha - inst.c - inst.beta * others - pi[:, None] * inst.a - omega[None, :] * inst.d
    gamma = np.where(Y == 0, -(margin + nu), margin - 2 * inst.beta - mu).astype(float)
    cert = KktCertificate(pi, gamma, mu, nu, omega)
    cert.residuals = kkt_residuals(inst, Y, cert)
    return cert


@dataclass
class FailureWitness:
    y: np.ndarray
    certificate: KktCertificate
    disequilibrium: float
    regrets: np.ndarray


def demonstrate_failure(inst: KnapsackInstance) -> FailureWitness:
    """A feasible KKT point that is not an equilibrium.

    Feasible points are scanned by number of active entries, then
    lexicographically; the first with a profitable unilateral deviation is
    returned. Raises :class:`NoCounterexample` if there is none.
    """
    P = feasible_points(inst)
    order = sorted(range(len(P)), key=lambda k: (P[k].sum(), k))
    for k in order:
        y = P[k]
        regrets = brute_force_regrets(inst, y)
        if regrets.max() > 0:
            if verify_gne(inst, y, tol=0.0):
                continue  # pragma: no cover - enumeration and MILP disagree
            cert = construct_multipliers(inst, y)
            return FailureWitness(y.copy(), cert, float(regrets.max()), regrets)
    raise NoCounterexample("every feasible point is an equilibrium")
