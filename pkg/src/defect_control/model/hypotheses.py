"""
Sampling checks for the structural hypotheses on phi.

Existence needs an affine l with (l(u) - phi(u)) u <= M for all u; the
lambda -> infinity limit needs phi non-decreasing. Both checks are advisory:
they sample a finite interval, and for polynomial phi the existence check
also inspects the leading term of (l - phi) u.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from defect_control.config import (
    HYPOTHESIS_RANGE,
    HYPOTHESIS_SAMPLES,
    WITNESS_INTERCEPTS,
    WITNESS_SLOPES,
)
from defect_control.model.nonlinearity import Nonlinearity

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExistenceReport:
    """Outcome of the existence-hypothesis check for one witness l(u) = slope u + intercept."""

    holds: bool
    max_value: float
    slope: float
    intercept: float
    bounded_at_infinity: bool


def _samples(u_range: tuple[float, float], samples: int) -> np.ndarray:
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    low, high = u_range
    if not low < high:
        raise ValueError(f"empty sampling interval {u_range}")
    return np.linspace(low, high, samples)


def _bounded_above(coefficients: np.ndarray) -> bool:
    """Whether a polynomial (ascending coefficients) is bounded above on the real line."""
    trimmed = P.polytrim(coefficients, tol=0)
    degree = len(trimmed) - 1
    if degree == 0:
        return True
    return degree % 2 == 0 and trimmed[-1] < 0


def check_existence_hypothesis(
    phi: Nonlinearity,
    l_slope: float,
    l_intercept: float,
    u_range: tuple[float, float] = HYPOTHESIS_RANGE,
    samples: int = HYPOTHESIS_SAMPLES,
) -> ExistenceReport:
    """
    Check (l(u) - phi(u)) u <= M for the affine witness l(u) = l_slope u + l_intercept.

    Args:
        phi: Reaction term
        l_slope: Slope of the witness
        l_intercept: Intercept of the witness
        u_range: Sampling interval, endpoints included
        samples: Number of sample points

    Returns:
        ExistenceReport; max_value is the sampled supremum of g(u) = (l(u) - phi(u)) u
    """
    u = _samples(u_range, samples)
    witness = np.array([l_intercept, l_slope], dtype=np.float64)
    g = P.polymulx(P.polysub(witness, np.asarray(phi.coefficients)))

    values = P.polyval(u, g)
    max_value = float(np.max(values))
    bounded = _bounded_above(g)
    holds = bool(bounded and np.isfinite(max_value))
    return ExistenceReport(
        holds=holds,
        max_value=max_value,
        slope=float(l_slope),
        intercept=float(l_intercept),
        bounded_at_infinity=bounded,
    )


def find_existence_witness(
    phi: Nonlinearity,
    slopes: tuple[float, ...] = WITNESS_SLOPES,
    intercepts: tuple[float, ...] = WITNESS_INTERCEPTS,
    u_range: tuple[float, float] = HYPOTHESIS_RANGE,
    samples: int = HYPOTHESIS_SAMPLES,
) -> ExistenceReport:
    """
    Search a slope/intercept grid for an affine witness.

    l = 0 is tried first. Otherwise the witness with the smallest bound M
    wins, ties broken by the smaller |slope| + |intercept|. When none holds,
    the report for l = 0 is returned.
    """
    zero = check_existence_hypothesis(phi, 0.0, 0.0, u_range, samples)
    if zero.holds:
        return zero

    best: tuple[float, float, ExistenceReport] | None = None
    for slope in slopes:
        for intercept in intercepts:
            report = check_existence_hypothesis(phi, slope, intercept, u_range, samples)
            if not report.holds:
                continue
            rank = (report.max_value, abs(slope) + abs(intercept))
            if best is None or rank < best[:2]:
                best = (rank[0], rank[1], report)

    if best is None:
        logger.warning(f"no affine witness found for phi={phi.describe()} on the search grid")
        return zero
    return best[2]


def check_monotone(
    phi: Nonlinearity,
    u_range: tuple[float, float] = HYPOTHESIS_RANGE,
    samples: int = HYPOTHESIS_SAMPLES,
) -> bool:
    """True iff phi'(u) >= 0 at every sample of ``u_range``."""
    u = _samples(u_range, samples)
    return bool(np.all(phi.deriv(u) >= 0.0))
