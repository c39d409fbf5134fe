# game_core.py

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from numerics import Matrix, NumericMode, Scalar, Vector, to_scalar, DimensionMismatchError

logger = logging.getLogger(__name__)

# Відхилення суми ймовірностей від 1 у float-режимі
FLOAT_SIMPLEX_TOLERANCE = 1e-9
# Ліміт розміру для точного симплекс-методу
MAX_EXACT_K = 64


class BoundsViolationError(ValueError):
    pass


class InvalidStrategyError(ValueError):
    pass


class SolverLimitError(ValueError):
    pass


# --- МАТРИЦЯ ГРИ ---

@dataclass(frozen=True)
class GameMatrix:
    matrix: Matrix
    bounds: tuple = (Fraction(-1), Fraction(1))

    def __post_init__(self):
        lo, hi = (to_scalar(b, self.matrix.mode) for b in self.bounds)
        object.__setattr__(self, "bounds", (lo, hi))
        if lo > hi:
            raise BoundsViolationError(f"Некоректні межі [{lo}, {hi}]")
        for i, row in enumerate(self.matrix.rows):
            for j, x in enumerate(row):
                if x < lo or x > hi:
                    raise BoundsViolationError(f"Елемент M[{i}][{j}] = {x} поза межами [{lo}, {hi}]")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], mode: NumericMode = NumericMode.EXACT, bounds=(-1, 1)) -> "GameMatrix":
        return cls(Matrix.of(rows, mode), bounds)

    @property
    def K(self) -> int:
        return self.matrix.K

    @property
    def mode(self) -> NumericMode:
        return self.matrix.mode

    def entry(self, i: int, j: int) -> Scalar:
        return self.matrix.entry(i, j)

    def to_mode(self, mode: NumericMode) -> "GameMatrix":
        return GameMatrix(self.matrix.to_mode(mode), self.bounds)


# --- ЗМІШАНІ СТРАТЕГІЇ ---

@dataclass(frozen=True)
class MixedStrategy:
    weights: Vector

    def __post_init__(self):
        if any(w < 0 for w in self.weights):
            raise InvalidStrategyError(f"Від'ємна ймовірність у стратегії {self.weights.to_strings()}")
        total = self.weights.total()
        if self.weights.mode == NumericMode.EXACT:
            if total != 1:
                raise InvalidStrategyError(f"Сума ймовірностей {total} ≠ 1")
        elif abs(total - 1.0) > FLOAT_SIMPLEX_TOLERANCE:
            raise InvalidStrategyError(f"Сума ймовірностей {total} ≠ 1")

    @classmethod
    def of(cls, values: Sequence, mode: NumericMode = NumericMode.EXACT) -> "MixedStrategy":
        return cls(Vector.of(values, mode))

    @classmethod
    def uniform(cls, K: int, mode: NumericMode = NumericMode.EXACT) -> "MixedStrategy":
        if mode == NumericMode.EXACT:
            return cls(Vector.of([Fraction(1, K)] * K, mode))
        return cls(Vector.of([1.0 / K] * K, mode))

    @classmethod
    def pure(cls, K: int, index: int, mode: NumericMode = NumericMode.EXACT) -> "MixedStrategy":
        return cls(Vector.basis(K, index, mode))

    @property
    def K(self) -> int:
        return self.weights.dim

    @property
    def mode(self) -> NumericMode:
        return self.weights.mode

    def __getitem__(self, index: int) -> Scalar:
        return self.weights[index]

    def __iter__(self):
        return iter(self.weights)

    def to_strings(self) -> list[str]:
        return self.weights.to_strings()


def average_strategies(strategies: Sequence[MixedStrategy]) -> MixedStrategy:
    """Середнє арифметичне послідовності стратегій."""
    if not strategies:
        raise InvalidStrategyError("Порожня послідовність стратегій")
    mode = strategies[0].mode
    total = Vector.zeros(strategies[0].K, mode)
    for s in strategies:
        total = total + s.weights
    count = Fraction(1, len(strategies)) if mode == NumericMode.EXACT else 1.0 / len(strategies)
    weights = total.scale(count)
    if mode == NumericMode.FLOAT:
        weights = weights.scale(1.0 / weights.total())
    return MixedStrategy(weights)


def rationalize(values, max_denominator: int = 2 ** 20) -> MixedStrategy:
    """Переводить float-стратегію у точний елемент симплекса."""
    if isinstance(values, MixedStrategy):
        values = list(values)
    fracs = [max(Fraction(float(x)).limit_denominator(max_denominator), Fraction(0)) for x in values]
    total = sum(fracs, Fraction(0))
    if total == 0:
        return MixedStrategy.uniform(len(fracs), NumericMode.EXACT)
    return MixedStrategy(Vector(tuple(f / total for f in fracs), NumericMode.EXACT))


def _check_dims(M: GameMatrix, *strategies: MixedStrategy):
    for s in strategies:
        if s.K != M.K:
            raise DimensionMismatchError(f"Стратегія розмірності {s.K} для гри {M.K}×{M.K}")


# --- РОЗРИВ ТА РІВНОВАГА ---

@dataclass(frozen=True)
class GapReport:
    gap: Scalar
    best_column: int
    best_row: int
    col_payoffs: Vector
    row_losses: Vector


@dataclass(frozen=True)
class EquilibriumSolution:
    p_star: MixedStrategy
    q_star: MixedStrategy
    value: Scalar


def gap(M: GameMatrix, p: MixedStrategy, q: MixedStrategy) -> GapReport:
    """g(M,p,q) = max_j (Mᵀp)_j − min_i (Mq)_i; при рівності береться найменший індекс."""
    _check_dims(M, p, q)
    col_payoffs = M.matrix.tmul_vec(p.weights)
    row_losses = M.matrix.mul_vec(q.weights)
    best_column = col_payoffs.argmax()
    best_row = row_losses.argmin()
    return GapReport(
        gap=col_payoffs[best_column] - row_losses[best_row],
        best_column=best_column,
        best_row=best_row,
        col_payoffs=col_payoffs,
        row_losses=row_losses,
    )


def is_eps_equilibrium(M: GameMatrix, p: MixedStrategy, q: MixedStrategy, eps) -> bool:
    eps = to_scalar(eps, M.mode)
    if eps < 0:
        raise ValueError(f"ε повинно бути невід'ємним, отримано {eps}")
    return gap(M, p, q).gap <= 2 * eps


def min_support(p: MixedStrategy, q: MixedStrategy) -> Scalar:
    if p.K != q.K:
        raise DimensionMismatchError(f"Розмірності стратегій {p.K} ≠ {q.K}")
    return min(min(p.weights), min(q.weights))


def support_bound(s, alpha, eps, K: int) -> Scalar:
    """Нижня межа 1/K − 2(α + ε)(K−1)/s на ймовірності ε-рівноваг у кулі."""
    if s <= 0:
        raise ValueError(f"s повинно бути додатним, отримано {s}")
    if alpha < 0 or eps < 0:
        raise ValueError("α та ε повинні бути невід'ємними")
    exact = all(not isinstance(x, float) for x in (s, alpha, eps))
    if exact:
        s, alpha, eps = Fraction(s), Fraction(alpha), Fraction(eps)
        return Fraction(1, K) - 2 * (alpha + eps) * (K - 1) / s
    return 1.0 / K - 2.0 * (alpha + eps) * (K - 1) / s


# --- ТОЧНИЙ СИМПЛЕКС-МЕТОД ---

def _pivot(tableau: list[list[Fraction]], row: int, col: int):
    pivot = tableau[row][col]
    tableau[row] = [x / pivot for x in tableau[row]]
    for r in range(len(tableau)):
        if r != row and tableau[r][col] != 0:
            factor = tableau[r][col]
            tableau[r] = [x - factor * y for x, y in zip(tableau[r], tableau[row])]


def solve_exact(M: GameMatrix) -> EquilibriumSolution:
    """
    Точна рівновага через ЛП: max Σx при Aᵀx ≤ 1, x ≥ 0, де A = M + зсув > 0.
    Симплекс на раціональних числах з правилом Бленда; q береться з двоїстих змінних.
    """
    if M.mode != NumericMode.EXACT:
        raise SolverLimitError("solve_exact працює лише в точному режимі")
    K = M.K
    if K > MAX_EXACT_K:
        raise SolverLimitError(f"K = {K} перевищує ліміт {MAX_EXACT_K}")

    shift = 1 - min(x for row in M.matrix.rows for x in row)
    A = [[x + shift for x in row] for row in M.matrix.rows]

    # Рядок j: Σ_i A[i][j] x_i + s_j = 1; останній рядок містить цільову функцію
    width = 2 * K + 1
    tableau = []
    for j in range(K):
        row = [A[i][j] for i in range(K)] + [Fraction(int(j == k)) for k in range(K)] + [Fraction(1)]
        tableau.append(row)
    tableau.append([Fraction(-1)] * K + [Fraction(0)] * K + [Fraction(0)])
    basis = [K + j for j in range(K)]

    iterations = 0
    while True:
        objective = tableau[-1]
        entering = next((c for c in range(2 * K) if objective[c] < 0), None)
        if entering is None:
            break
        leaving = None
        best_ratio = None
        for r in range(K):
            a = tableau[r][entering]
            if a > 0:
                ratio = tableau[r][width - 1] / a
                if best_ratio is None or ratio < best_ratio or (ratio == best_ratio and basis[r] < basis[leaving]):
                    best_ratio, leaving = ratio, r
        if leaving is None:
            raise RuntimeError("Необмежена задача ЛП (неможливо для додатної матриці)")
        _pivot(tableau, leaving, entering)
        basis[leaving] = entering
        iterations += 1

    x = [Fraction(0)] * K
    for r, var in enumerate(basis):
        if var < K:
            x[var] = tableau[r][width - 1]
    y = [tableau[-1][K + j] for j in range(K)]
    total = tableau[-1][width - 1]
    value_shifted = 1 / total

    p_star = MixedStrategy(Vector(tuple(xi * value_shifted for xi in x), NumericMode.EXACT))
    q_star = MixedStrategy(Vector(tuple(yj * value_shifted for yj in y), NumericMode.EXACT))
    value = value_shifted - shift

    report = gap(M, p_star, q_star)
    if report.col_payoffs[report.best_column] != value or report.row_losses[report.best_row] != value:
        raise RuntimeError("Двоїстий сертифікат не зійшовся")
    logger.debug(f"solve_exact: K={K}, ітерацій {iterations}, значення гри {value}")
    return EquilibriumSolution(p_star=p_star, q_star=q_star, value=value)


def game_value(M: GameMatrix) -> Scalar:
    return solve_exact(M).value


# --- ГЕНЕРАЦІЯ ВИПАДКОВИХ МАТРИЦЬ ---

def random_matrix(K: int, rng: np.random.Generator, mode: NumericMode = NumericMode.EXACT,
                  lo=-1, hi=1, denominator: int = 64) -> GameMatrix:
    """Випадкова матриця з елементами на сітці 1/denominator в [lo, hi]."""
    lo, hi = Fraction(lo), Fraction(hi)
    low = int(np.ceil(float(lo * denominator)))
    high = int(np.floor(float(hi * denominator)))
    grid = rng.integers(low, high + 1, size=(K, K))
    rows = [[Fraction(int(x), denominator) for x in row] for row in grid]
    if mode == NumericMode.FLOAT:
        rows = [[float(x) for x in row] for row in rows]
    return GameMatrix(Matrix.of(rows, mode), (lo, hi))


def sample_ball_matrix(K: int, radius, rng: np.random.Generator, steps: int = 16) -> GameMatrix:
    """Точна матриця з кулі ‖M − (1/2)I‖_{1,∞} ≤ radius (сітка radius/steps)."""
    radius = Fraction(radius)
    offsets = rng.integers(-steps, steps + 1, size=(K, K))
    rows = [
        [Fraction(int(i == j), 2) + radius * Fraction(int(offsets[i][j]), steps) for j in range(K)]
        for i in range(K)
    ]
    return GameMatrix(Matrix.of(rows, NumericMode.EXACT))
