# numerics.py

import logging
import sys
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, float]

# Відносний поріг належності до лінійної оболонки у float-режимі
FLOAT_SPAN_TOLERANCE = 1e-9

# Точні записи "num/den" у протоколах супротивника мають тисячі цифр
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)


class NumericMode(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


# EXACT зберігає Fraction у масивах dtype=object, FLOAT працює з float64
DTYPES = {NumericMode.EXACT: object, NumericMode.FLOAT: np.float64}


class DimensionMismatchError(ValueError):
    pass


class ModeMismatchError(ValueError):
    pass


class NoComplementError(ValueError):
    pass


# --- СКАЛЯРИ ---

def to_scalar(value, mode: NumericMode) -> Scalar:
    """Приводить число (int, str "a/b", Fraction, float) до скаляра заданого режиму."""
    if mode == NumericMode.EXACT:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, float):
            return Fraction.from_float(value)
        if isinstance(value, str):
            return parse_scalar(value, mode)
        return Fraction(value)
    if isinstance(value, str):
        return parse_scalar(value, mode)
    return float(value)


def format_scalar(value: Scalar) -> str:
    """Канонічний рядок: "num/den" для раціональних, найкоротший repr для float."""
    if isinstance(value, float):
        return repr(float(value))
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_scalar(text: str, mode: NumericMode) -> Scalar:
    text = str(text).strip()
    if mode == NumericMode.EXACT:
        return Fraction(text)
    if "/" in text:
        num, den = text.split("/", 1)
        return int(num) / int(den)
    return float(text)


def _python(value, mode: NumericMode) -> Scalar:
    return float(value) if mode == NumericMode.FLOAT else value


def _checked_array(values, mode: NumericMode) -> np.ndarray:
    if isinstance(values, np.ndarray):
        if values.dtype != np.dtype(DTYPES[mode]):
            raise ModeMismatchError(f"Масив {values.dtype} не відповідає режиму {mode.value}")
        return values.copy()
    items = list(values)
    expected = float if mode == NumericMode.FLOAT else Fraction
    for x in items:
        if not isinstance(x, expected):
            raise ModeMismatchError(f"Елемент {x!r} не відповідає режиму {mode.value}")
    return np.array(items, dtype=DTYPES[mode])


def _frozen(data: np.ndarray) -> np.ndarray:
    data.flags.writeable = False
    return data


# --- ВЕКТОРИ ---

class Vector:
    """Незмінний вектор над масивом numpy."""
    __slots__ = ("data", "mode")

    def __init__(self, entries, mode: NumericMode):
        mode = NumericMode(mode)
        data = _checked_array(entries, mode)
        if data.ndim != 1 or data.size == 0:
            raise DimensionMismatchError("Вектор повинен мати розмірність K ≥ 1")
        self.data = _frozen(data)
        self.mode = mode

    @classmethod
    def _wrap(cls, data: np.ndarray, mode: NumericMode) -> "Vector":
        v = cls.__new__(cls)
        v.data = _frozen(data)
        v.mode = mode
        return v

    @classmethod
    def of(cls, values: Iterable, mode: NumericMode) -> "Vector":
        return cls([to_scalar(v, mode) for v in values], mode)

    @classmethod
    def zeros(cls, dim: int, mode: NumericMode) -> "Vector":
        return cls.of([0] * dim, mode)

    @classmethod
    def ones(cls, dim: int, mode: NumericMode) -> "Vector":
        return cls.of([1] * dim, mode)

    @classmethod
    def basis(cls, dim: int, index: int, mode: NumericMode) -> "Vector":
        values = [0] * dim
        values[index] = 1
        return cls.of(values, mode)

    @property
    def entries(self) -> tuple:
        return tuple(self.data.tolist())

    @property
    def dim(self) -> int:
        return int(self.data.shape[0])

    def __len__(self) -> int:
        return self.dim

    def __iter__(self):
        return iter(self.data.tolist())

    def __getitem__(self, index: int) -> Scalar:
        return _python(self.data[index], self.mode)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vector):
            return NotImplemented
        return (self.mode == other.mode and self.data.shape == other.data.shape
                and bool(np.all(self.data == other.data)))

    def __hash__(self) -> int:
        return hash((self.mode, self.entries))

    def __repr__(self) -> str:
        return f"Vector({self.to_strings()}, {self.mode.value})"

    def _check(self, other: "Vector"):
        if self.mode != other.mode:
            raise ModeMismatchError(f"Змішані режими: {self.mode.value} та {other.mode.value}")
        if self.dim != other.dim:
            raise DimensionMismatchError(f"Розмірності не збігаються: {self.dim} ≠ {other.dim}")

    def __add__(self, other: "Vector") -> "Vector":
        self._check(other)
        return Vector._wrap(self.data + other.data, self.mode)

    def __sub__(self, other: "Vector") -> "Vector":
        self._check(other)
        return Vector._wrap(self.data - other.data, self.mode)

    def __neg__(self) -> "Vector":
        return Vector._wrap(-self.data, self.mode)

    def scale(self, factor) -> "Vector":
        return Vector._wrap(self.data * to_scalar(factor, self.mode), self.mode)

    def dot(self, other: "Vector") -> Scalar:
        self._check(other)
        return _python(np.dot(self.data, other.data), self.mode)

    def norm_sq(self) -> Scalar:
        return self.dot(self)

    def norm_inf(self) -> Scalar:
        return _python(np.max(np.abs(self.data)), self.mode)

    def total(self) -> Scalar:
        return _python(self.data.sum(), self.mode)

    def is_zero(self) -> bool:
        return bool(np.all(self.data == 0))

    def argmax(self) -> int:
        """Індекс максимуму; при рівності береться найменший індекс."""
        return int(np.argmax(self.data))

    def argmin(self) -> int:
        return int(np.argmin(self.data))

    def to_mode(self, mode: NumericMode) -> "Vector":
        if mode == self.mode:
            return self
        if mode == NumericMode.FLOAT:
            return Vector._wrap(self.data.astype(np.float64), mode)
        return Vector.of(self.entries, mode)

    def to_numpy(self) -> np.ndarray:
        return self.data.astype(np.float64)

    def to_strings(self) -> list[str]:
        return [format_scalar(a) for a in self.data.tolist()]


# --- МАТРИЦІ ---

class Matrix:
    """Незмінна квадратна матриця K×K над масивом numpy."""
    __slots__ = ("data", "mode")

    def __init__(self, rows, mode: NumericMode):
        mode = NumericMode(mode)
        if isinstance(rows, np.ndarray):
            data = _checked_array(rows, mode)
        else:
            rows = [list(row) for row in rows]
            size = len(rows)
            if size == 0 or any(len(row) != size for row in rows):
                raise DimensionMismatchError("Матриця повинна бути квадратною K×K")
            data = _checked_array([x for row in rows for x in row], mode).reshape(size, size)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.size == 0:
            raise DimensionMismatchError("Матриця повинна бути квадратною K×K")
        self.data = _frozen(data)
        self.mode = mode

    @classmethod
    def _wrap(cls, data: np.ndarray, mode: NumericMode) -> "Matrix":
        m = cls.__new__(cls)
        m.data = _frozen(data)
        m.mode = mode
        return m

    @classmethod
    def of(cls, rows: Sequence[Sequence], mode: NumericMode) -> "Matrix":
        return cls([[to_scalar(x, mode) for x in row] for row in rows], mode)

    @classmethod
    def identity(cls, dim: int, mode: NumericMode, diagonal=1) -> "Matrix":
        return cls.of([[diagonal if i == j else 0 for j in range(dim)] for i in range(dim)], mode)

    @classmethod
    def zeros(cls, dim: int, mode: NumericMode) -> "Matrix":
        return cls.of([[0] * dim for _ in range(dim)], mode)

    @classmethod
    def outer(cls, left: Vector, right: Vector) -> "Matrix":
        """Зовнішній добуток left · rightᵀ."""
        left._check(right)
        return cls._wrap(np.outer(left.data, right.data), left.mode)

    @property
    def K(self) -> int:
        return int(self.data.shape[0])

    @property
    def rows(self) -> tuple:
        return tuple(tuple(row) for row in self.data.tolist())

    def entry(self, i: int, j: int) -> Scalar:
        return _python(self.data[i, j], self.mode)

    def row(self, i: int) -> Vector:
        return Vector._wrap(self.data[i].copy(), self.mode)

    def column(self, j: int) -> Vector:
        return Vector._wrap(self.data[:, j].copy(), self.mode)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.mode == other.mode and self.data.shape == other.data.shape
                and bool(np.all(self.data == other.data)))

    def __hash__(self) -> int:
        return hash((self.mode, self.rows))

    def __repr__(self) -> str:
        return f"Matrix({self.to_strings()}, {self.mode.value})"

    def _check_vector(self, v: Vector):
        if v.mode != self.mode:
            raise ModeMismatchError(f"Змішані режими: {self.mode.value} та {v.mode.value}")
        if v.dim != self.K:
            raise DimensionMismatchError(f"Розмірності не збігаються: {self.K} ≠ {v.dim}")

    def mul_vec(self, v: Vector) -> Vector:
        """M·v"""
        self._check_vector(v)
        return Vector._wrap(np.dot(self.data, v.data), self.mode)

    def tmul_vec(self, v: Vector) -> Vector:
        """Mᵀ·v"""
        self._check_vector(v)
        return Vector._wrap(np.dot(v.data, self.data), self.mode)

    def _check_matrix(self, other: "Matrix"):
        if other.mode != self.mode:
            raise ModeMismatchError(f"Змішані режими: {self.mode.value} та {other.mode.value}")
        if other.K != self.K:
            raise DimensionMismatchError(f"Розмірності не збігаються: {self.K} ≠ {other.K}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_matrix(other)
        return Matrix._wrap(self.data + other.data, self.mode)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_matrix(other)
        return Matrix._wrap(self.data - other.data, self.mode)

    def scale(self, factor) -> "Matrix":
        return Matrix._wrap(self.data * to_scalar(factor, self.mode), self.mode)

    def transpose(self) -> "Matrix":
        return Matrix._wrap(self.data.T.copy(), self.mode)

    def max_abs(self) -> Scalar:
        """Норма ‖·‖_{1,∞}: максимальний модуль елемента."""
        return _python(np.max(np.abs(self.data)), self.mode)

    def to_mode(self, mode: NumericMode) -> "Matrix":
        if mode == self.mode:
            return self
        if mode == NumericMode.FLOAT:
            return Matrix._wrap(self.data.astype(np.float64), mode)
        return Matrix.of(self.rows, mode)

    def to_strings(self) -> list[list[str]]:
        return [[format_scalar(x) for x in row] for row in self.data.tolist()]


# --- ЛІНІЙНА ОБОЛОНКА ---

@dataclass(frozen=True)
class SpanBasis:
    """Ортогональний (ненормований) базис лінійної оболонки."""
    dim: int
    vectors: tuple = ()

    @classmethod
    def empty(cls, dim: int) -> "SpanBasis":
        return cls(dim, ())

    def __len__(self) -> int:
        return len(self.vectors)


def _check_span(v: Vector, basis: SpanBasis):
    if v.dim != basis.dim:
        raise DimensionMismatchError(f"Розмірність вектора {v.dim} ≠ розмірності базису {basis.dim}")
    for e in basis.vectors:
        if e.mode != v.mode:
            raise ModeMismatchError(f"Змішані режими: {v.mode.value} та {e.mode.value}")


def project_onto_span(v: Vector, basis: SpanBasis) -> tuple[Vector, Vector]:
    """Повертає (проекція, залишок); коефіцієнти ⟨v,e⟩/⟨e,e⟩ без коренів."""
    _check_span(v, basis)
    projection = Vector.zeros(v.dim, v.mode)
    for e in basis.vectors:
        projection = projection + e.scale(v.dot(e) / e.norm_sq())
    return projection, v - projection


def _residual_is_zero(residual: Vector, v: Vector) -> bool:
    if residual.mode == NumericMode.EXACT:
        return residual.is_zero()
    return float(np.linalg.norm(residual.data)) <= FLOAT_SPAN_TOLERANCE * float(np.linalg.norm(v.data))


def extend_span(basis: SpanBasis, v: Vector) -> SpanBasis:
    _, residual = project_onto_span(v, basis)
    if residual.is_zero() or _residual_is_zero(residual, v):
        return basis
    return SpanBasis(basis.dim, basis.vectors + (residual,))


def span_of(vectors: Iterable[Vector], dim: int) -> SpanBasis:
    basis = SpanBasis.empty(dim)
    for v in vectors:
        basis = extend_span(basis, v)
    return basis


def span_distance_sq(v: Vector, basis: SpanBasis) -> Scalar:
    _, residual = project_onto_span(v, basis)
    return residual.norm_sq()


# --- ВИКЛЮЧЕННЯ ГАУССА ---

def rref(rows: Sequence[Sequence[Scalar]], width: int, mode: NumericMode) -> tuple[list[list[Scalar]], list[int]]:
    """Зведена ступінчаста форма; повертає (рядки, стовпці-півоти)."""
    if not rows:
        return [], []
    matrix = np.array([[to_scalar(x, mode) for x in row] for row in rows], dtype=DTYPES[mode])
    if matrix.shape[1] != width:
        raise DimensionMismatchError(f"Ширина рядків {matrix.shape[1]} ≠ {width}")
    count = matrix.shape[0]
    scale = (float(np.max(np.abs(matrix))) or 1.0) if mode == NumericMode.FLOAT else 1.0
    pivots: list[int] = []
    lead = 0
    for col in range(width):
        if lead >= count:
            break
        column = matrix[lead:, col]
        if mode == NumericMode.EXACT:
            nonzero = np.flatnonzero(column != 0)
            if nonzero.size == 0:
                continue
            pivot_row = lead + int(nonzero[0])
        else:
            magnitudes = np.abs(column)
            best = int(np.argmax(magnitudes))
            if magnitudes[best] <= FLOAT_SPAN_TOLERANCE * scale:
                continue
            pivot_row = lead + best
        matrix[[lead, pivot_row]] = matrix[[pivot_row, lead]]
        matrix[lead] = matrix[lead] / matrix[lead, col]
        factors = matrix[:, col].copy()
        factors[lead] = to_scalar(0, mode)
        matrix = matrix - np.outer(factors, matrix[lead])
        pivots.append(col)
        lead += 1
    return matrix[:lead].tolist(), pivots


def matrix_rank(rows: Sequence[Sequence[Scalar]], width: int, mode: NumericMode) -> int:
    _, pivots = rref(rows, width, mode)
    return len(pivots)


def kernel_basis(vectors: Sequence[Vector], dim: int, mode: NumericMode = None) -> list[Vector]:
    """Базис ядра системи ⟨u, w⟩ = 0, впорядкований за вільними стовпцями."""
    if mode is None:
        mode = vectors[0].mode if vectors else NumericMode.EXACT
    for w in vectors:
        if w.dim != dim:
            raise DimensionMismatchError(f"Розмірність {w.dim} ≠ {dim}")
        if w.mode != mode:
            raise ModeMismatchError(f"Змішані режими: {mode.value} та {w.mode.value}")
    reduced, pivots = rref([w.entries for w in vectors], dim, mode)
    zero, one = to_scalar(0, mode), to_scalar(1, mode)
    free_columns = [c for c in range(dim) if c not in pivots]
    result = []
    for free in free_columns:
        u = [zero] * dim
        u[free] = one
        for row, pivot_col in zip(reduced, pivots):
            u[pivot_col] = -row[free]
        result.append(Vector(u, mode))
    return result


def orthogonal_complement_vector(vectors: Sequence[Vector], dim: int, mode: NumericMode = None) -> Vector:
    """Ненульовий вектор, ортогональний усім вхідним (вільний стовпець з найменшим індексом)."""
    kernel = kernel_basis(vectors, dim, mode)
    if not kernel:
        raise NoComplementError("no complement: вхідні вектори породжують увесь простір")
    return kernel[0]
