from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from numerics import Matrix, NumericMode
from game_core import (
    GameMatrix, MixedStrategy, average_strategies, gap, game_value, is_eps_equilibrium,
    min_support, random_matrix, rationalize, sample_ball_matrix, solve_exact, support_bound,
    BoundsViolationError, InvalidStrategyError, SolverLimitError, MAX_EXACT_K,
)

PENNIES = GameMatrix.from_rows([[1, -1], [-1, 1]])
RPS = GameMatrix.from_rows([[0, 1, -1], [-1, 0, 1], [1, -1, 0]])
IDENTITY_2 = GameMatrix.from_rows([[1, 0], [0, 1]])


def strategy(*values):
    return MixedStrategy.of(values)


@st.composite
def game_instances(draw, max_k=5):
    K = draw(st.integers(1, max_k))
    entries = st.fractions(min_value=-1, max_value=1, max_denominator=12)
    rows = draw(st.lists(st.lists(entries, min_size=K, max_size=K), min_size=K, max_size=K))

    def simplex():
        weights = draw(st.lists(st.integers(0, 9), min_size=K, max_size=K).filter(any))
        total = sum(weights)
        return MixedStrategy.of([Fraction(w, total) for w in weights])

    return GameMatrix.from_rows(rows), simplex(), simplex()


# --- gap ---

def test_gap_zero_at_matching_pennies_center():
    u = MixedStrategy.uniform(2)
    assert gap(PENNIES, u, u).gap == 0


def test_gap_of_pure_corner():
    e1 = MixedStrategy.pure(2, 0)
    report = gap(PENNIES, e1, e1)
    assert report.gap == 2
    assert report.best_column == 0
    assert report.best_row == 1


def test_gap_single_action():
    M = GameMatrix.from_rows([[Fraction(1, 3)]])
    one = MixedStrategy.uniform(1)
    assert gap(M, one, one).gap == 0


@seed(11)
@settings(max_examples=300, deadline=None)
@given(game_instances(max_k=8))
def test_gap_is_nonnegative(case):
    M, p, q = case
    assert gap(M, p, q).gap >= 0


@seed(12)
@settings(max_examples=100, deadline=None)
@given(game_instances(max_k=4), st.fractions(min_value=Fraction(1, 8), max_value=8, max_denominator=8))
def test_gap_indices_invariant_under_positive_scaling(case, factor):
    M, p, q = case
    scaled = GameMatrix(M.matrix.scale(factor), (-8, 8))
    base, other = gap(M, p, q), gap(scaled, p, q)
    assert (base.best_column, base.best_row) == (other.best_column, other.best_row)
    assert other.gap == factor * base.gap


# --- is_eps_equilibrium ---

def test_eps_equilibrium_examples():
    u = MixedStrategy.uniform(2)
    e1 = MixedStrategy.pure(2, 0)
    assert is_eps_equilibrium(PENNIES, u, u, 0)
    assert not is_eps_equilibrium(PENNIES, e1, e1, Fraction(1, 2))


def test_negative_eps_rejected():
    u = MixedStrategy.uniform(2)
    with pytest.raises(ValueError):
        is_eps_equilibrium(PENNIES, u, u, Fraction(-1, 10))


def test_uniform_pair_is_eps_equilibrium_for_large_eps():
    rng = np.random.default_rng(5)
    for K in (2, 3, 5, 8):
        u = MixedStrategy.uniform(K)
        for _ in range(20):
            assert is_eps_equilibrium(random_matrix(K, rng), u, u, 1 - Fraction(1, K))


def test_uniform_gap_on_all_sign_matrices():
    u = MixedStrategy.uniform(3)
    worst = max(
        gap(GameMatrix.from_rows([signs[0:3], signs[3:6], signs[6:9]]), u, u).gap
        for signs in product((-1, 1), repeat=9)
    )
    assert worst <= Fraction(4, 3)


# --- solve_exact ---

@pytest.mark.parametrize("M, p, q, value", [
    (PENNIES, (Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 2)), 0),
    (RPS, (Fraction(1, 3),) * 3, (Fraction(1, 3),) * 3, 0),
    (IDENTITY_2, (Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 2)), Fraction(1, 2)),
])
def test_solve_exact_examples(M, p, q, value):
    solution = solve_exact(M)
    assert tuple(solution.p_star) == p
    assert tuple(solution.q_star) == q
    assert solution.value == value
    assert game_value(M) == value


@seed(13)
@settings(max_examples=150, deadline=None)
@given(game_instances(max_k=4))
def test_solution_has_zero_gap_and_dual_certificate(case):
    M, p, q = case
    solution = solve_exact(M)
    report = gap(M, solution.p_star, solution.q_star)
    assert report.gap == 0
    assert report.col_payoffs[report.best_column] == solution.value == report.row_losses[report.best_row]
    # довільна пара з нульовим розривом дає те саме значення гри
    if gap(M, p, q).gap == 0:
        assert max(M.matrix.tmul_vec(p.weights)) == solution.value


def test_solver_limits():
    with pytest.raises(SolverLimitError):
        solve_exact(PENNIES.to_mode(NumericMode.FLOAT))
    size = MAX_EXACT_K + 1
    with pytest.raises(SolverLimitError):
        solve_exact(GameMatrix(Matrix.zeros(size, NumericMode.EXACT)))


# --- support_bound / min_support ---

def test_support_bound_examples():
    assert support_bound(Fraction(1, 2), 0, 0, 4) == Fraction(1, 4)
    assert support_bound(Fraction(1, 2), Fraction(1, 64), Fraction(1, 64), 2) == Fraction(3, 8)
    for K in range(2, 20):
        radius = Fraction(1, 16 * K * K)
        assert support_bound(Fraction(1, 2), radius, radius, K) >= Fraction(1, 2 * K)


def test_support_bound_rejects_nonpositive_s():
    with pytest.raises(ValueError):
        support_bound(0, 0, 0, 3)


def test_min_support_examples():
    u = MixedStrategy.uniform(4)
    assert min_support(u, u) == Fraction(1, 4)
    assert min_support(strategy(1, 0), MixedStrategy.uniform(2)) == 0
    p = strategy(Fraction(3, 8), Fraction(5, 8))
    assert min_support(p, p) == Fraction(3, 8)


def test_equilibria_near_half_identity_are_spread_out():
    rng = np.random.default_rng(8)
    for K in (2, 4, 8):
        for _ in range(10):
            M = sample_ball_matrix(K, Fraction(1, 16 * K * K), rng)
            assert (M.matrix - Matrix.identity(K, NumericMode.EXACT, Fraction(1, 2))).max_abs() <= Fraction(1, 16 * K * K)
            solution = solve_exact(M)
            assert min_support(solution.p_star, solution.q_star) >= Fraction(1, 2 * K)
            assert solution.value >= Fraction(1, 4 * K)


# --- конструктори ---

def test_entries_outside_bounds_rejected():
    with pytest.raises(BoundsViolationError):
        GameMatrix.from_rows([[Fraction(3, 2), 0], [0, 0]])


@pytest.mark.parametrize("values", [(Fraction(3, 2), Fraction(-1, 2)), (Fraction(1, 2), Fraction(1, 4))])
def test_invalid_strategies_rejected(values):
    with pytest.raises(InvalidStrategyError):
        strategy(*values)


def test_rationalize_returns_exact_simplex_point():
    p = rationalize([0.2, 0.3, 0.5 + 1e-12])
    assert p.mode == NumericMode.EXACT
    assert sum(p) == 1
    assert rationalize([0.0, 0.0]) == MixedStrategy.uniform(2)


def test_average_strategies():
    avg = average_strategies([MixedStrategy.pure(2, 0), MixedStrategy.pure(2, 1), MixedStrategy.pure(2, 1)])
    assert tuple(avg) == (Fraction(1, 3), Fraction(2, 3))


def test_random_matrix_is_seeded_and_bounded():
    a = random_matrix(5, np.random.default_rng(3), lo=0, hi=1)
    b = random_matrix(5, np.random.default_rng(3), lo=0, hi=1)
    assert a == b
    assert all(0 <= x <= 1 for row in a.matrix.rows for x in row)
