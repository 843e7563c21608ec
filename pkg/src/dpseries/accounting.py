"""Compose the certified (epsilon, delta) of a release from the Gaussian
mechanism's base guarantee and the probability ``delta'`` that the reduced
sensitivity claim fails.

On the failure event the true sensitivity is the worst case ``sqrt(I)``
rather than ``alpha * sqrt(I)``, so the Gaussian noise only buys
``epsilon / alpha`` there. That costs ``delta' * (exp(epsilon / alpha) -
exp(epsilon))`` extra delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidC, InvalidParams, Unsatisfiable
from .filters import FilterStats
from .sensitivity import (
    ALPHA_GRID,
    binomial_log_survival,
    binomial_tail_delta,
    chernoff_delta,
    grid_bisect,
)


@dataclass(frozen=True)
class PrivacyGuarantee:
    """Certified ``(epsilon_total, delta_total)`` plus the inputs that produced it.

    ``delta_total`` is clamped to 1; ``vacuous`` marks guarantees that hit
    the clamp.
    """

    epsilon_total: float
    delta_total: float
    vacuous: bool = False
    provenance: dict = field(default_factory=dict, compare=False)

    def recompute(self) -> "PrivacyGuarantee":
        """Rebuild the guarantee from its provenance record."""
        prov = self.provenance
        route = prov["route"]
        if route == "filtered":
            return compose_filtered(prov["epsilon"], prov["delta"], prov["alpha"], prov["delta_prime"])
        if route == "unfiltered":
            return compose_unfiltered(
                prov["epsilon"], prov["delta"], prov["I"], prov["I_prime"], prov["delta_prime"]
            )
        if route == "degraded":
            return degrade(prov["epsilon"], prov["delta"], prov["alpha"], prov["delta_prime"], prov["c"])
        if route == "worst-case":
            return worst_case(prov["epsilon"], prov["delta"])
        raise InvalidParams(f"unknown route {route!r}")

    def to_dict(self) -> dict:
        return {
            "epsilon_total": self.epsilon_total,
            "delta_total": self.delta_total,
            "vacuous": self.vacuous,
            "provenance": dict(self.provenance),
        }


def _finish(epsilon_total, delta, penalty, provenance):
    total = delta + penalty
    provenance = dict(provenance, penalty=penalty)
    if total >= 1.0:
        return PrivacyGuarantee(epsilon_total, 1.0, True, provenance)
    return PrivacyGuarantee(epsilon_total, total, False, provenance)


def _check_common(epsilon, delta, delta_prime):
    if not epsilon > 0:
        raise InvalidParams(f"epsilon must be positive, got {epsilon!r}")
    if not (0.0 < delta < 1.0):
        raise InvalidParams(f"delta must lie in (0, 1), got {delta!r}")
    if not (0.0 <= delta_prime <= 1.0):
        raise InvalidParams(f"delta' must lie in [0, 1], got {delta_prime!r}")


def worst_case(epsilon: float, delta: float) -> PrivacyGuarantee:
    """Guarantee of a mechanism calibrated to the worst-case sensitivity."""
    _check_common(epsilon, delta, 0.0)
    return _finish(epsilon, delta, 0.0, {"route": "worst-case", "epsilon": epsilon,
                                         "delta": delta, "delta_prime": 0.0})


def compose_filtered(epsilon: float, delta: float, alpha: float, delta_prime: float) -> PrivacyGuarantee:
    _check_common(epsilon, delta, delta_prime)
    if not (0.0 < alpha <= 1.0):
        raise InvalidParams(f"alpha must lie in (0, 1], got {alpha!r}")
    penalty = delta_prime * (math.exp(epsilon / alpha) - math.exp(epsilon))
    prov = {"route": "filtered", "epsilon": epsilon, "delta": delta,
            "alpha": alpha, "delta_prime": delta_prime}
    return _finish(epsilon, delta, penalty, prov)


def compose_unfiltered(epsilon: float, delta: float, I: int, I_prime: int, delta_prime: float) -> PrivacyGuarantee:
    _check_common(epsilon, delta, delta_prime)
    if int(I) != I or int(I_prime) != I_prime or not (1 <= I_prime <= I):
        raise InvalidParams(f"need integers 1 <= I' <= I, got I={I!r}, I'={I_prime!r}")
    penalty = delta_prime * (math.exp(math.sqrt(I / I_prime) * epsilon) - math.exp(epsilon))
    prov = {"route": "unfiltered", "epsilon": epsilon, "delta": delta, "I": int(I),
            "I_prime": int(I_prime), "delta_prime": delta_prime}
    return _finish(epsilon, delta, penalty, prov)


def degrade(epsilon: float, delta: float, alpha: float, delta_prime: float, c: float) -> PrivacyGuarantee:
    """Guarantee when individuals actually participate in up to ``c * I`` steps."""
    _check_common(epsilon, delta, delta_prime)
    if not c > 1.0:
        raise InvalidC(f"c must exceed 1 (use compose_filtered otherwise), got {c!r}")
    if not (0.0 < alpha <= 1.0):
        raise InvalidParams(f"alpha must lie in (0, 1], got {alpha!r}")
    eps_c = math.sqrt(c) * epsilon
    penalty = delta_prime * (math.exp(eps_c / alpha) - math.exp(eps_c))
    prov = {"route": "degraded", "epsilon": epsilon, "delta": delta, "alpha": alpha,
            "delta_prime": delta_prime, "c": c}
    return _finish(eps_c, delta, penalty, prov)


@dataclass(frozen=True)
class BudgetSolution:
    """Noise multiplier and delta split meeting an (epsilon, delta) target.

    Exactly one of ``alpha`` (filtered route) or ``I_prime`` (unfiltered
    route) is set.
    """

    base_delta: float
    delta_prime: float
    guarantee: PrivacyGuarantee
    alpha: Optional[float] = None
    I_prime: Optional[int] = None


def budget_solve(
    epsilon: float,
    delta_target: float,
    *,
    I: int,
    p: float,
    stats: Optional[FilterStats] = None,
    delta_split: float = 0.5,
) -> BudgetSolution:
    """Spend ``delta_split`` of the delta target on the Gaussian mechanism and
    the rest on the failure penalty, choosing the smallest feasible ``alpha``
    (when ``stats`` is given) or ``I'`` (identity filter)."""
    _check_common(epsilon, delta_target, 0.0)
    if not (0.0 < delta_split < 1.0):
        raise InvalidParams("delta_split must lie in (0, 1)")
    base = delta_target * delta_split

    if stats is None:
        surv = binomial_log_survival(I, p)
        k = np.arange(1, I + 1)
        with np.errstate(over="ignore"):
            approx = np.exp(surv[1:]) * (np.exp(np.sqrt(I / k) * epsilon) - math.exp(epsilon))
        ok = np.flatnonzero(base + approx <= delta_target)
        k0 = int(k[ok[0]]) if len(ok) else I

        def feasible(kk):
            g = compose_unfiltered(epsilon, base, I, kk, binomial_tail_delta(I, p, kk))
            return not g.vacuous and g.delta_total <= delta_target

        while k0 > 1 and feasible(k0 - 1):
            k0 -= 1
        while not feasible(k0):
            k0 += 1
        dp = binomial_tail_delta(I, p, k0)
        g = compose_unfiltered(epsilon, base, I, k0, dp)
        return BudgetSolution(base, dp, g, I_prime=k0)

    floor = math.sqrt(p) * stats.sigma_max
    if floor > 1.0:
        raise Unsatisfiable("sqrt(p) * sigma_max exceeds 1")

    def compose_at(a):
        return compose_filtered(epsilon, base, a, chernoff_delta(stats, p, a))

    def feasible_alpha(a):
        g = compose_at(a)
        return not g.vacuous and g.delta_total <= delta_target

    if feasible_alpha(floor):
        alpha = floor
    else:
        n = round(1.0 / ALPHA_GRID)
        k = grid_bisect(
            lambda kk: kk * ALPHA_GRID >= floor and feasible_alpha(kk / n),
            int(math.floor(floor / ALPHA_GRID)),
            n,
        )
        alpha = k / n
    g = compose_at(alpha)
    if g.delta_total > delta_target:
        raise Unsatisfiable("no alpha in [sqrt(p), 1] meets the delta target")
    return BudgetSolution(base, chernoff_delta(stats, p, alpha), g, alpha=alpha)
