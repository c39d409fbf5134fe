from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from numerics import NumericMode, Vector
from game_core import GameMatrix, MixedStrategy, BoundsViolationError, random_matrix
from oracle import Session, open_fixed_session, OracleInconsistencyError
from adversary import constraint_rank_analyzer
from recovery import (
    Alphabet, alphabet_matrix, assemble_matrix, decode_matrix, encode_probe, full_recovery, probe_recovery,
    InconsistentObservationError, InvalidAlphabetError,
)

BINARY = Alphabet.of([0, 1])
TERNARY = Alphabet.of([-1, 0, 1])
QUARTERS = Alphabet.of(range(-4, 5), 4)


def exact(*values):
    return Vector.of(values, NumericMode.EXACT)


def observe(M: GameMatrix, alphabet: Alphabet) -> Vector:
    return M.matrix.tmul_vec(encode_probe(alphabet, M.K).weights)


# --- пробна стратегія ---

@pytest.mark.parametrize("alphabet, K, expected", [
    (BINARY, 2, (Fraction(2, 3), Fraction(1, 3))),
    (TERNARY, 3, (Fraction(9, 13), Fraction(3, 13), Fraction(1, 13))),
    (QUARTERS, 1, (Fraction(1),)),
])
def test_probe_weights(alphabet, K, expected):
    assert tuple(encode_probe(alphabet, K)) == expected


def test_base_is_spread_plus_one():
    assert BINARY.base == 2
    assert TERNARY.base == 3
    assert QUARTERS.base == 9


# --- декодування ---

def test_decode_identity_worked_example():
    observed = exact(Fraction(2, 3), Fraction(1, 3))
    assert observe(GameMatrix.from_rows([[1, 0], [0, 1]]), BINARY) == observed
    decoded = decode_matrix(BINARY, 2, observed)
    assert decoded.matrix.to_strings() == [["1/1", "0/1"], ["0/1", "1/1"]]


def test_decode_zero_observation():
    decoded = decode_matrix(BINARY, 3, exact(0, 0, 0))
    assert all(x == 0 for row in decoded.matrix.rows for x in row)


@pytest.mark.parametrize("alphabet", [BINARY, TERNARY, QUARTERS])
def test_decode_round_trip(alphabet):
    rng = np.random.default_rng(alphabet.base)
    for _ in range(100):
        K = int(rng.integers(1, 17))
        M = alphabet_matrix(alphabet, K, rng)
        assert decode_matrix(alphabet, K, observe(M, alphabet)).matrix == M.matrix


def test_probe_is_injective_on_binary_two_by_two():
    observations = set()
    for bits in product((0, 1), repeat=4):
        M = GameMatrix.from_rows([bits[0:2], bits[2:4]])
        observations.add(observe(M, BINARY).entries)
    assert len(observations) == 16


def test_decode_rejects_unrepresentable_observation():
    with pytest.raises(InconsistentObservationError):
        decode_matrix(BINARY, 2, exact(Fraction(1, 5), 0))


def test_decode_rejects_digit_outside_alphabet():
    sparse = Alphabet.of([0, 2])
    with pytest.raises(InconsistentObservationError):
        decode_matrix(sparse, 1, exact(1))


def test_decode_rejects_float_observation():
    with pytest.raises(ValueError):
        decode_matrix(BINARY, 1, Vector.of([1.0], NumericMode.FLOAT))


@pytest.mark.parametrize("denominator, numerators", [(1, (1,)), (1, (0, 0, 1)), (0, (0, 1))])
def test_invalid_alphabets(denominator, numerators):
    with pytest.raises(InvalidAlphabetError):
        Alphabet(denominator, numerators)


def test_alphabet_dict_form():
    assert Alphabet.from_dict(QUARTERS.to_dict()) == QUARTERS
    with pytest.raises(InvalidAlphabetError):
        Alphabet.from_dict({"numerators": [0, 1]})


# --- відновлення через запити ---

def test_full_recovery_example():
    M = GameMatrix.from_rows([[Fraction(1, 2), Fraction(-1, 2)], [Fraction(1, 4), 1]])
    session = open_fixed_session(M)
    assert full_recovery(session) == M
    assert session.queries_used == 2


def test_full_recovery_single_action():
    M = GameMatrix.from_rows([[Fraction(-1, 3)]])
    session = open_fixed_session(M)
    assert full_recovery(session, 1) == M
    assert session.queries_used == 1


def test_full_recovery_random_matrices():
    rng = np.random.default_rng(50)
    for _ in range(20):
        K = int(rng.integers(1, 9))
        M = random_matrix(K, rng)
        session = open_fixed_session(M)
        assert full_recovery(session).matrix == M.matrix
        assert session.queries_used == K


class SkewedSession(Session):
    """Відповідає стовпцями однієї матриці, а рядками іншої."""
    kind = "skewed"

    def __init__(self, columns: GameMatrix, rows: GameMatrix):
        super().__init__(columns.K, columns.mode, columns.bounds)
        self._columns, self._rows = columns, rows

    def _respond(self, p, q):
        return self._columns.matrix.mul_vec(q.weights), -self._rows.matrix.tmul_vec(p.weights)

    def reveal(self):
        return self._columns


def test_full_recovery_detects_inconsistent_oracle():
    session = SkewedSession(GameMatrix.from_rows([[0, 1], [0, 0]]), GameMatrix.from_rows([[0, 0], [1, 0]]))
    with pytest.raises(OracleInconsistencyError):
        full_recovery(session)


def test_assemble_requires_basis_queries():
    session = open_fixed_session(GameMatrix.from_rows([[0, 1], [1, 0]]))
    u = MixedStrategy.uniform(2)
    record = session.query(u, u)
    with pytest.raises(ValueError):
        assemble_matrix([record], 2, session.bounds)


def test_probe_recovery_uses_one_query():
    M = alphabet_matrix(TERNARY, 6, np.random.default_rng(51))
    session = open_fixed_session(M)
    assert probe_recovery(session, TERNARY).matrix == M.matrix
    assert session.queries_used == 1


def test_probe_recovery_checks_alphabet_bounds():
    session = open_fixed_session(GameMatrix.from_rows([[0, 1], [1, 0]]))
    with pytest.raises(BoundsViolationError):
        probe_recovery(session, Alphabet.of([0, 2]))


def test_fewer_than_k_basis_queries_leave_freedom():
    K = 5
    queries = [(MixedStrategy.pure(K, t), MixedStrategy.pure(K, t)) for t in range(K)]
    report = constraint_rank_analyzer(queries, K)
    for t, (_, null) in enumerate(report, start=1):
        assert null == (K - t) ** 2
    assert report[-1][1] == 0
