from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from numerics import (
    Matrix, NumericMode, SpanBasis, Vector,
    extend_span, format_scalar, kernel_basis, matrix_rank, orthogonal_complement_vector,
    parse_scalar, project_onto_span, span_distance_sq, span_of,
    DimensionMismatchError, ModeMismatchError, NoComplementError,
)

EXACT = NumericMode.EXACT
FLOAT = NumericMode.FLOAT


def vec(*values, mode=EXACT):
    return Vector.of(values, mode)


def basis(*vectors, dim=None):
    dim = dim if dim is not None else vectors[0].dim
    return SpanBasis(dim, tuple(vectors))


rationals = st.fractions(min_value=-4, max_value=4, max_denominator=16)


@st.composite
def vectors_and_family(draw, max_dim=6, max_count=5):
    dim = draw(st.integers(1, max_dim))
    v = Vector.of(draw(st.lists(rationals, min_size=dim, max_size=dim)), EXACT)
    family = draw(st.lists(st.lists(rationals, min_size=dim, max_size=dim), max_size=max_count))
    return v, [Vector.of(w, EXACT) for w in family]


# --- project_onto_span ---

def test_projection_axis_aligned():
    projection, residual = project_onto_span(vec(1, 1), basis(vec(1, 0)))
    assert projection == vec(1, 0)
    assert residual == vec(0, 1)


def test_projection_onto_empty_span():
    projection, residual = project_onto_span(vec(3, 4), SpanBasis.empty(2))
    assert projection == vec(0, 0)
    assert residual == vec(3, 4)


def test_projection_of_ones_onto_adversary_direction():
    e = vec(Fraction(1, 2), Fraction(1, 8), Fraction(-1, 8), 0)
    v = vec(1, 1, 1, 1)
    projection, residual = project_onto_span(v, basis(e))
    assert v.dot(e) == Fraction(1, 2)
    assert e.norm_sq() == Fraction(9, 32)
    assert projection == e.scale(Fraction(1, 2) / Fraction(9, 32))
    assert residual.norm_sq() == Fraction(28, 9)


def test_projection_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        project_onto_span(vec(1, 2, 3), basis(vec(1, 0)))


def test_projection_mixed_modes():
    with pytest.raises(ModeMismatchError):
        project_onto_span(vec(1.0, 2.0, mode=FLOAT), basis(vec(1, 0)))


@seed(1)
@settings(max_examples=200, deadline=None)
@given(vectors_and_family())
def test_projection_is_exact_decomposition(case):
    v, family = case
    span = span_of(family, v.dim)
    projection, residual = project_onto_span(v, span)
    assert projection + residual == v
    for e in span.vectors:
        assert residual.dot(e) == 0


@seed(2)
@settings(max_examples=200, deadline=None)
@given(vectors_and_family())
def test_span_basis_is_orthogonal(case):
    v, family = case
    span = span_of(family + [v], v.dim)
    assert len(span) <= v.dim
    for a in range(len(span.vectors)):
        for b in range(a + 1, len(span.vectors)):
            assert span.vectors[a].dot(span.vectors[b]) == 0


# --- extend_span ---

def test_extend_with_vector_in_span():
    span = basis(vec(1, 0))
    assert extend_span(span, vec(2, 0)) == span


def test_extend_with_new_direction():
    extended = extend_span(basis(vec(1, 0)), vec(1, 1))
    assert extended.vectors == (vec(1, 0), vec(0, 1))


def test_zero_vector_never_added():
    assert len(extend_span(SpanBasis.empty(2), vec(0, 0))) == 0


def test_float_extend_ignores_rounding_residual():
    span = basis(vec(1.0, 1.0, 0.0, mode=FLOAT))
    nearly = vec(1.0 + 1e-13, 1.0, 0.0, mode=FLOAT)
    assert extend_span(span, nearly) == span
    assert len(extend_span(span, vec(0.0, 0.0, 1.0, mode=FLOAT))) == 2


# --- span_distance_sq ---

@pytest.mark.parametrize("v, span, expected", [
    (vec(1, 1, 1, 1), SpanBasis.empty(4), Fraction(4)),
    (vec(1, 1, 1, 1), basis(vec(Fraction(1, 2), Fraction(1, 8), Fraction(-1, 8), 0)), Fraction(28, 9)),
    (vec(1, 0), basis(vec(1, 0)), Fraction(0)),
])
def test_span_distance_examples(v, span, expected):
    assert span_distance_sq(v, span) == expected


@seed(3)
@settings(max_examples=200, deadline=None)
@given(vectors_and_family(), st.data())
def test_distance_shrinks_by_new_direction_component(case, data):
    v, family = case
    span = span_of(family, v.dim)
    w = Vector.of(data.draw(st.lists(rationals, min_size=v.dim, max_size=v.dim)), EXACT)
    extended = extend_span(span, w)
    before, after = span_distance_sq(v, span), span_distance_sq(v, extended)
    assert after <= before
    if len(extended) > len(span):
        e = extended.vectors[-1]
        assert before == after + v.dot(e) ** 2 / e.norm_sq()
    else:
        assert before == after


# --- orthogonal_complement_vector ---

def test_complement_of_e1_and_ones():
    assert orthogonal_complement_vector([vec(1, 0, 0, 0), vec(1, 1, 1, 1)], 4) == vec(0, -1, 1, 0)


def test_complement_of_empty_family():
    assert orthogonal_complement_vector([], 2) == vec(1, 0)


def test_complement_of_single_vector():
    u = orthogonal_complement_vector([vec(1, 1)], 2)
    assert not u.is_zero()
    assert u.dot(vec(1, 1)) == 0
    assert u == vec(-1, 1)


def test_no_complement_when_family_spans_space():
    with pytest.raises(NoComplementError):
        orthogonal_complement_vector([vec(1, 0), vec(1, 1)], 2)


@seed(4)
@settings(max_examples=200, deadline=None)
@given(vectors_and_family(max_dim=8, max_count=4))
def test_kernel_vectors_annihilate_inputs(case):
    v, family = case
    kernel = kernel_basis(family, v.dim, EXACT)
    assert len(kernel) == v.dim - matrix_rank([w.entries for w in family], v.dim, EXACT)
    for u in kernel:
        assert all(u.dot(w) == 0 for w in family)
    if kernel:
        assert orthogonal_complement_vector(family, v.dim, EXACT) == kernel[0]


# --- скаляри, вектори, матриці ---

def test_scalar_text_forms():
    assert format_scalar(Fraction(-6, 4)) == "-3/2"
    assert format_scalar(Fraction(3)) == "3/1"
    assert format_scalar(0.1) == "0.1"
    assert parse_scalar("6/4", EXACT) == Fraction(3, 2)
    assert parse_scalar("1/4", FLOAT) == 0.25


def test_vectors_refuse_mixed_modes():
    with pytest.raises(ModeMismatchError):
        vec(1, 2) + vec(1.0, 2.0, mode=FLOAT)
    with pytest.raises(DimensionMismatchError):
        vec(1, 2) + vec(1, 2, 3)


def test_argmax_and_argmin_take_lowest_index():
    v = vec(1, 3, 3, -2, -2)
    assert v.argmax() == 1
    assert v.argmin() == 3


def test_matrix_products_and_norm():
    M = Matrix.of([[Fraction(1, 2), Fraction(-1, 2)], [Fraction(1, 4), 1]], EXACT)
    assert M.mul_vec(vec(0, 1)) == vec(Fraction(-1, 2), 1)
    assert M.tmul_vec(vec(1, 0)) == vec(Fraction(1, 2), Fraction(-1, 2))
    assert M.transpose().mul_vec(vec(1, 0)) == M.tmul_vec(vec(1, 0))
    assert M.max_abs() == 1
    assert Matrix.outer(vec(1, 2), vec(3, 4)) == Matrix.of([[3, 4], [6, 8]], EXACT)


def test_matrix_must_be_square():
    with pytest.raises(DimensionMismatchError):
        Matrix.of([[1, 2]], EXACT)


def test_rank_of_dependent_rows():
    assert matrix_rank([[1, 2, 3], [2, 4, 6], [0, 1, 1]], 3, EXACT) == 2
    assert matrix_rank([], 3, EXACT) == 0


def test_storage_follows_mode():
    exact = vec(Fraction(1, 3), 2)
    floats = vec(0.5, 1.5, mode=FLOAT)
    assert exact.data.dtype == object
    assert floats.data.dtype == np.float64
    assert isinstance(exact.dot(exact), Fraction)
    assert type(floats.dot(floats)) is float
    assert type(floats[0]) is float
    assert exact.to_mode(FLOAT) == vec(1 / 3, 2.0, mode=FLOAT)


def test_vectors_are_immutable():
    v = vec(1, 2)
    with pytest.raises(ValueError):
        v.data[0] = Fraction(5)
    M = Matrix.identity(2, EXACT)
    with pytest.raises(ValueError):
        M.data[0, 1] = Fraction(1)


def test_float_rref_pivots_on_largest_entry():
    assert matrix_rank([[1e-3, 1.0], [1.0, 1.0]], 2, FLOAT) == 2
    assert matrix_rank([[1.0, 2.0], [2.0, 4.0 + 1e-14]], 2, FLOAT) == 1
    u = orthogonal_complement_vector([vec(1.0, 1.0, mode=FLOAT)], 2)
    assert u == vec(-1.0, 1.0, mode=FLOAT)


def test_huge_rationals_format_and_parse():
    value = Fraction(1, 3 ** 12000)
    text = format_scalar(value)
    assert len(text) > 4300
    assert parse_scalar(text, EXACT) == value
