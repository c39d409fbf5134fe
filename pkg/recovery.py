# recovery.py

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from numerics import Matrix, NumericMode, Vector, ModeMismatchError
from game_core import GameMatrix, MixedStrategy, BoundsViolationError
from oracle import QueryRecord, Session, OracleInconsistencyError, learner_view

logger = logging.getLogger(__name__)


class InvalidAlphabetError(ValueError):
    pass


class InconsistentObservationError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """Скінченний алфавіт значень {a_1/r, …, a_n/r}."""
    denominator: int
    numerators: tuple

    def __post_init__(self):
        if int(self.denominator) != self.denominator or self.denominator <= 0:
            raise InvalidAlphabetError(f"Знаменник повинен бути додатним цілим, отримано {self.denominator}")
        numerators = tuple(sorted(set(int(a) for a in self.numerators)))
        if len(numerators) != len(self.numerators):
            raise InvalidAlphabetError("Чисельники алфавіту повинні бути різними цілими")
        if len(numerators) < 2:
            raise InvalidAlphabetError("Алфавіт повинен містити щонайменше два значення")
        object.__setattr__(self, "denominator", int(self.denominator))
        object.__setattr__(self, "numerators", numerators)

    @classmethod
    def of(cls, values: Sequence, denominator: int = 1) -> "Alphabet":
        return cls(denominator, tuple(values))

    @property
    def values(self) -> tuple:
        return tuple(Fraction(a, self.denominator) for a in self.numerators)

    @property
    def base(self) -> int:
        # spread + 1: інакше цифрові вектори колізують
        return self.numerators[-1] - self.numerators[0] + 1

    def check_bounds(self, bounds: tuple):
        lo, hi = (Fraction(b) for b in bounds)
        for value in self.values:
            if value < lo or value > hi:
                raise BoundsViolationError(f"Значення алфавіту {value} поза межами [{lo}, {hi}]")

    def to_dict(self) -> dict:
        return {"denominator": self.denominator, "numerators": list(self.numerators)}

    @classmethod
    def from_dict(cls, data: dict) -> "Alphabet":
        try:
            return cls(int(data["denominator"]), tuple(int(a) for a in data["numerators"]))
        except (KeyError, TypeError) as e:
            raise InvalidAlphabetError(f"Некоректний опис алфавіту: {e}")


def _geometric_total(base: int, K: int) -> Fraction:
    return sum((Fraction(1, base ** k) for k in range(1, K + 1)), Fraction(0))


def encode_probe(alphabet: Alphabet, K: int) -> MixedStrategy:
    """Пробна стратегія p_i = b^{−i} / Σ_k b^{−k}."""
    if K < 1:
        raise ValueError(f"K повинно бути ≥ 1, отримано {K}")
    b = alphabet.base
    total = _geometric_total(b, K)
    weights = tuple(Fraction(1, b ** i) / total for i in range(1, K + 1))
    return MixedStrategy(Vector(weights, NumericMode.EXACT))


def decode_matrix(alphabet: Alphabet, K: int, observed: Vector) -> GameMatrix:
    """Відновлює M за одним спостереженням Mᵀp для пробної p; цифри по стовпцях."""
    if observed.mode != NumericMode.EXACT:
        raise ModeMismatchError("Декодування можливе лише в точному режимі")
    if observed.dim != K:
        raise InconsistentObservationError(f"Спостереження розмірності {observed.dim} для K = {K}")
    b = alphabet.base
    r = alphabet.denominator
    a_min = alphabet.numerators[0]
    allowed = set(alphabet.numerators)
    total = _geometric_total(b, K)

    columns = []
    for j, value in enumerate(observed):
        u = value * total
        w = (u - Fraction(a_min, r) * total) * r
        scaled = w * b ** K
        if scaled.denominator != 1 or scaled < 0 or scaled >= b ** K:
            raise InconsistentObservationError(f"inconsistent observation: стовпець {j} = {value} не кодується алфавітом")
        number = int(scaled)
        digits = []
        for _ in range(K):
            number, digit = divmod(number, b)
            digits.append(digit)
        digits.reverse()
        column = []
        for i, digit in enumerate(digits):
            numerator = digit + a_min
            if numerator not in allowed:
                raise InconsistentObservationError(
                    f"inconsistent observation: цифра {digit} у M[{i}][{j}] поза алфавітом"
                )
            column.append(Fraction(numerator, r))
        columns.append(column)

    rows = [[columns[j][i] for j in range(K)] for i in range(K)]
    values = alphabet.values
    return GameMatrix(Matrix.of(rows, NumericMode.EXACT), (min(values[0], -1), max(values[-1], 1)))


def alphabet_matrix(alphabet: Alphabet, K: int, rng: np.random.Generator) -> GameMatrix:
    choices = rng.choice(np.array(alphabet.numerators), size=(K, K))
    rows = [[Fraction(int(a), alphabet.denominator) for a in row] for row in choices]
    values = alphabet.values
    return GameMatrix(Matrix.of(rows, NumericMode.EXACT), (min(values[0], -1), max(values[-1], 1)))


# --- ВІДНОВЛЕННЯ ЧЕРЕЗ ЗАПИТИ ---

def assemble_matrix(records: Sequence[QueryRecord], K: int, bounds: tuple,
                    prior: Optional[GameMatrix] = None) -> GameMatrix:
    """
    Збирає M з базисних запитів (e_t, e_t): рядок t = −loss_q, стовпець t = loss_p.
    Невідомі елементи беруться з prior (за замовчуванням нулі); перетини звіряються.
    """
    if not records:
        raise ValueError("Немає запитів для відновлення")
    mode = records[0].p.mode
    known = len(records)
    for index, record in enumerate(records):
        expected = Vector.basis(K, index, mode)
        if record.p.weights != expected or record.q.weights != expected:
            raise ValueError(f"Запит {record.t} не є базисним (e_{index + 1}, e_{index + 1})")
    base = prior.matrix if prior is not None else Matrix.zeros(K, mode)
    if base.mode != mode:
        base = base.to_mode(mode)

    rows = []
    for i in range(K):
        row = []
        for j in range(K):
            from_row = -records[i].loss_q[j] if i < known else None
            from_column = records[j].loss_p[i] if j < known else None
            if from_row is not None and from_column is not None and from_row != from_column:
                raise OracleInconsistencyError(
                    f"Рядок і стовпець не збігаються в M[{i}][{j}]: {from_row} ≠ {from_column}"
                )
            if from_row is not None:
                row.append(from_row)
            elif from_column is not None:
                row.append(from_column)
            else:
                row.append(base.entry(i, j))
        rows.append(row)
    return GameMatrix(Matrix.of(rows, mode), bounds)


def full_recovery(session: Session, K: Optional[int] = None) -> GameMatrix:
    session = learner_view(session)
    K = session.K if K is None else K
    if K != session.K:
        raise ValueError(f"K = {K} не відповідає сесії з K = {session.K}")
    records = []
    for t in range(K):
        e = MixedStrategy.pure(K, t, session.mode)
        records.append(session.query(e, e))
    M = assemble_matrix(records, K, session.bounds)
    logger.info(f"Матрицю {K}×{K} відновлено за {len(records)} запитів")
    return M


def probe_recovery(session: Session, alphabet: Alphabet) -> GameMatrix:
    """Один запит (probe, uniform); q не впливає на спостереження Mᵀp."""
    session = learner_view(session)
    if session.mode != NumericMode.EXACT:
        raise ModeMismatchError("Пробне відновлення потребує точного режиму")
    alphabet.check_bounds(session.bounds)
    probe = encode_probe(alphabet, session.K)
    record = session.query(probe, MixedStrategy.uniform(session.K, NumericMode.EXACT))
    M = decode_matrix(alphabet, session.K, -record.loss_q)
    logger.info(f"Матрицю {session.K}×{session.K} декодовано за один запит (основа {alphabet.base})")
    return M
