"""Evaluable sample-complexity and regret expressions.

The batch forms are O/Omega statements without constants; each evaluator
multiplies by a calibration constant (default 1) and takes the ceiling last.
All logarithms in the batch forms are base 2. The online forms use the
explicit constants from the Freedman-inequality argument with natural logs,
so ``loglog(T) = ln(ln(T))``, defined for ``T >= 4`` only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import PreconditionError


def _check(eps: float, delta: float) -> None:
    if not 0 < eps < 1:
        raise PreconditionError(f"epsilon must lie in (0, 1), got {eps}")
    if not 0 < delta < 1:
        raise PreconditionError(f"delta must lie in (0, 1), got {delta}")


def _check_dim(ndim: int, k: int | None = None) -> None:
    if ndim < 0:
        raise PreconditionError("dimension must be non-negative")
    if k is not None and k < 2:
        raise PreconditionError("need at least two labels")


def m_pac_lb(ndim: int, eps: float, delta: float) -> int:
    _check(eps, delta)
    _check_dim(ndim)
    return math.ceil((ndim + math.log2(1 / delta)) / eps)


def m_agn_lb(ndim: int, eps: float, delta: float) -> int:
    _check(eps, delta)
    _check_dim(ndim)
    return math.ceil((ndim + math.log2(1 / delta)) / eps**2)


def m_pac_ub(ndim: int, k: int, eps: float, delta: float, C: float = 1.0) -> int:
    """``C (Ndim log k log(1/eps) + log(1/delta)) / eps``."""
    _check(eps, delta)
    _check_dim(ndim, k)
    return math.ceil(C * (ndim * math.log2(k) * math.log2(1 / eps) + math.log2(1 / delta)) / eps)


def m_pac_ub_alt(ndim: int, k: int, eps: float, delta: float, C: float = 1.0) -> int:
    """``C (Ndim (log k + log(1/eps) + log Ndim) + log(1/delta)) / eps``; better in eps, worse in Ndim."""
    _check(eps, delta)
    _check_dim(ndim, k)
    log_nd = math.log2(ndim) if ndim > 0 else 0.0
    return math.ceil(C * (ndim * (math.log2(k) + math.log2(1 / eps) + log_nd) + math.log2(1 / delta)) / eps)


def m_agn_ub(ndim: int, k: int, eps: float, delta: float, C: float = 1.0) -> int:
    """``C (Ndim log k + log(1/delta)) / eps**2``."""
    _check(eps, delta)
    _check_dim(ndim, k)
    return math.ceil(C * (ndim * math.log2(k) + math.log2(1 / delta)) / eps**2)


@dataclass(frozen=True)
class BoundFormulas:
    """Calibration constants for the upper-bound evaluators."""

    C_pac: float = 1.0
    C_agn: float = 1.0

    def __post_init__(self):
        if self.C_pac <= 0 or self.C_agn <= 0:
            raise PreconditionError("calibration constants must be positive")

    def m_pac(self, ndim: int, k: int, eps: float, delta: float) -> int:
        return m_pac_ub(ndim, k, eps, delta, self.C_pac)

    def m_pac_alt(self, ndim: int, k: int, eps: float, delta: float) -> int:
        return m_pac_ub_alt(ndim, k, eps, delta, self.C_pac)

    def m_agn(self, ndim: int, k: int, eps: float, delta: float) -> int:
        return m_agn_ub(ndim, k, eps, delta, self.C_agn)


# fixed once for the whole repository; the acceptance suite runs at these values
CALIBRATION = BoundFormulas(C_pac=1.0, C_agn=1.0)


def loglog(T: int) -> float:
    if T < 4:
        raise PreconditionError(f"loglog(T) is only used for T >= 4, got T = {T}")
    return math.log(math.log(T))


def freedman_threshold(ldim: int, T: int, delta: float) -> float:
    """``8 Ldim + 256 loglog T + 256 delta``; exceeded with probability at most ``exp(-delta)``."""
    return 8 * ldim + 256 * loglog(T) + 256 * delta


def freedman_high_prob(ldim: int, T: int, delta: float) -> float:
    """``8 Ldim + 256 (loglog T + ln(1/delta))``, holding with probability ``1 - delta``."""
    if not 0 < delta < 1:
        raise PreconditionError("delta must lie in (0, 1)")
    return 8 * ldim + 256 * (loglog(T) + math.log(1 / delta))


def freedman_expected(ldim: int, T: int) -> float:
    """Bound on the expected cumulative loss: ``8 Ldim + 256 loglog T + 256``."""
    return 8 * ldim + 256 * loglog(T) + 256


def agnostic_regret_bound(ldim: int, T: int) -> float:
    """``24 sqrt(Ldim T (ln T + 1))`` for binary classes."""
    return 24 * math.sqrt(ldim * T * (math.log(T) + 1))


def multiclass_agnostic_regret_bound(mcldim: int, k: int, T: int) -> float:
    """``24 sqrt(4 k log2(k) mcLdim T (ln T + 1))``."""
    return 24 * math.sqrt(4 * k * math.log2(k) * mcldim * T * (math.log(T) + 1))


def mw_regret_bound(num_experts: int, T: int) -> float:
    """Expected regret of exponential weights with ``eta = sqrt(8 ln N / T)``."""
    return math.sqrt(T * math.log(num_experts) / 2)
