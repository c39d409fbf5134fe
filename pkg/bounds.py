# bounds.py

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

logger = logging.getLogger(__name__)

# Константа c для графіка верхньої межі; жодний тест не фіксує її значення
DEFAULT_UPPER_C = 8

Number = Union[Fraction, float, int]


@dataclass(frozen=True)
class BoundsRecord:
    K: int
    eps: Optional[Number]
    T: Optional[int]
    upper_T: float
    lower_eps: Optional[Number]
    lower_T: float
    exact_lower_T: int


def _log(x: Number) -> float:
    """Натуральний логарифм без переповнення для дуже малих раціональних."""
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def exact_lower_T(K: int) -> int:
    """⌈K/2 − 1⌉."""
    return max(0, (K - 1) // 2)


def guard_eps(K: int) -> float:
    """1/(e·2¹¹K⁴): межа режиму, де діє нижня оцінка."""
    return 1.0 / (math.e * 2 ** 11 * K ** 4)


def lower_eps(K: int, T: int) -> Number:
    """(1/(2¹⁰K⁴))·(1/(2^{11/2}K^{5/2}T))^{T+1}; точне значення, якщо 2K є повним квадратом."""
    if K < 2 or T < 1:
        raise ValueError(f"Потрібно K ≥ 2 та T ≥ 1, отримано K={K}, T={T}")
    prefactor = Fraction(1, 2 ** 10 * K ** 4)
    root = math.isqrt(2 * K)
    if root * root == 2 * K:
        # 2^{11/2}K^{5/2} = 32·K²·√(2K)
        return prefactor * Fraction(1, 32 * K * K * root * T) ** (T + 1)
    factor = 1.0 / (2 ** 5.5 * K ** 2.5 * T)
    return float(prefactor) * factor ** (T + 1)


def upper_T(K: int, eps: Number, c: Number = DEFAULT_UPPER_C) -> float:
    """min(c·ln K/ε, K) з режимами великих ε: 2 при ε ≥ 1/2, 0 при ε ≥ 1 − 1/K."""
    if eps <= 0:
        raise ValueError(f"ε повинно бути додатним, отримано {eps}")
    if eps >= 1 - Fraction(1, K):
        return 0.0
    if eps >= Fraction(1, 2):
        return float(min(2, K))
    return min(float(c) * math.log(K) / float(eps), float(K))


def lower_T(K: int, eps: Number) -> float:
    """
    Нижня оцінка кількості запитів для ε ≤ 1/(e·2¹¹K⁴), обмежена K/2 − 1;
    поза цим режимом повертає 0.
    """
    if eps <= 0:
        raise ValueError(f"ε повинно бути додатним, отримано {eps}")
    if float(eps) > guard_eps(K):
        return 0.0
    scaled = -(_log(eps) + math.log(2 ** 11 * K ** 4))
    denominator = math.log(2 ** 5.5 * K ** 2.5) + math.log(scaled)
    value = scaled / denominator - 1
    return max(0.0, min(value, K / 2 - 1))


def invert_query_bound(a: Number, b: Number, eps: Number) -> float:
    """log(a/ε)/log(b·log(a/ε)) для ε ≤ a/e."""
    if a <= 0 or b <= 0 or eps <= 0:
        raise ValueError("a, b та ε повинні бути додатними")
    log_ratio = _log(a) - _log(eps)
    if log_ratio < 1 - 1e-12:
        raise ValueError(f"Порушено умову ε ≤ a/e (log(a/ε) = {log_ratio})")
    inner = float(b) * log_ratio
    if inner <= 1:
        raise ValueError(f"b·log(a/ε) = {inner} ≤ 1: логарифм знаменника невизначений")
    return log_ratio / math.log(inner)


def theoretical_bounds(K: int, eps: Optional[Number] = None, T: Optional[int] = None,
                       c: Number = DEFAULT_UPPER_C) -> BoundsRecord:
    """
    Збирає всі формули для (K, ε) або (K, T). Якщо задано лише T,
    ε береться рівним lower_eps(K, T).
    """
    if K < 2:
        raise ValueError(f"K повинно бути ≥ 2, отримано {K}")
    if eps is None and T is None:
        raise ValueError("Потрібно задати ε або T")
    if eps is not None and eps <= 0:
        raise ValueError(f"ε повинно бути додатним, отримано {eps}")
    low_eps = lower_eps(K, T) if T is not None else None
    if eps is None:
        eps = low_eps
    return BoundsRecord(
        K=K,
        eps=eps,
        T=T,
        upper_T=upper_T(K, eps, c),
        lower_eps=low_eps,
        lower_T=lower_T(K, eps),
        exact_lower_T=exact_lower_T(K),
    )
