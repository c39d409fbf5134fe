# adversary.py

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

from numerics import (
    Matrix, NumericMode, SpanBasis, Vector,
    extend_span, kernel_basis, matrix_rank, orthogonal_complement_vector,
    project_onto_span, span_distance_sq, span_of, ModeMismatchError,
)
from game_core import GameMatrix, MixedStrategy, BoundsViolationError, gap
from oracle import BudgetExceededError, QueryRecord, Session, Transcript, replay

logger = logging.getLogger(__name__)


class AdversaryBudgetError(BudgetExceededError):
    pass


class AdversaryKind(str, Enum):
    EXACT_CASE = "exact"
    APPROX_CASE = "approx"


class WitnessSide(str, Enum):
    ROW = "row"
    COLUMN = "column"
    CENTER = "center"


@dataclass(frozen=True)
class TraceRow:
    t: int
    u_norm_sq: Fraction
    step_parameter: Fraction
    potential: Fraction
    drift: Fraction
    decay: Optional[Fraction]


@dataclass
class AdversaryState:
    K: int
    kind: AdversaryKind
    horizon: int
    M_current: GameMatrix
    center: GameMatrix
    radius: Fraction
    inner_radius: Fraction
    margin: Fraction = Fraction(1, 2)
    alpha: Optional[Fraction] = None
    alpha_bar: Optional[Fraction] = None
    t: int = 0
    p_span: SpanBasis = None
    q_constraints: list = field(default_factory=list)
    lossq_constraints: list = field(default_factory=list)
    lossq_span: SpanBasis = None
    rounds: list = field(default_factory=list)
    trace: list = field(default_factory=list)

    def __post_init__(self):
        if self.p_span is None:
            self.p_span = SpanBasis.empty(self.K)
        if self.lossq_span is None:
            self.lossq_span = SpanBasis.empty(self.K)

    @property
    def history(self) -> Transcript:
        return Transcript(K=self.K, mode=NumericMode.EXACT, oracle_kind=f"{self.kind.value}_adversary",
                          rounds=tuple(self.rounds))

    @property
    def drift(self) -> Fraction:
        return (self.M_current.matrix - self.center.matrix).max_abs()


@dataclass(frozen=True)
class WitnessReport:
    witness: GameMatrix
    gap: Fraction
    direction_kind: WitnessSide
    scale: Fraction


def _center(K: int) -> GameMatrix:
    return GameMatrix(Matrix.identity(K, NumericMode.EXACT, Fraction(1, 2)))


def _ones(K: int) -> Vector:
    return Vector.ones(K, NumericMode.EXACT)


# --- ПОБУДОВА ---

def new_exact_adversary(K: int) -> AdversaryState:
    """M₀ = (1/2)I_K, запас 1/2; горизонт ⌊K/2 − 1⌋."""
    if K < 3:
        raise ValueError(f"Точний супротивник потребує K ≥ 3, отримано {K}")
    M0 = _center(K)
    radius = Fraction(1, 2)
    return AdversaryState(
        K=K, kind=AdversaryKind.EXACT_CASE, horizon=(K - 2) // 2,
        M_current=M0, center=M0, radius=radius, inner_radius=radius,
    )


def dyadic_alpha(alpha: Fraction) -> Fraction:
    """ᾱ: найбільший степінь 1/4, строго менший за α (α/ᾱ ∈ (1, 4])."""
    m = 0
    while Fraction(1, 4 ** m) >= alpha:
        m += 1
    return Fraction(1, 4 ** m)


def new_approx_adversary(K: int, T: int) -> AdversaryState:
    """Куля радіуса r = 1/(16K²) навколо (1/2)I_K; α = (r/2)²/(KT²)."""
    if K < 5:
        raise ValueError(f"Наближений супротивник потребує K ≥ 5, отримано {K}")
    if T < 1 or 2 * T + 3 > K:
        raise ValueError(f"Горизонт T = {T} поза межами 1 ≤ T ≤ (K−3)/2 для K = {K}")
    M0 = _center(K)
    r = Fraction(1, 16 * K * K)
    alpha = (r / 2) ** 2 / (K * T * T)
    return AdversaryState(
        K=K, kind=AdversaryKind.APPROX_CASE, horizon=T,
        M_current=M0, center=M0, radius=r, inner_radius=r / 2,
        alpha=alpha, alpha_bar=dyadic_alpha(alpha),
    )


# --- ВІДПОВІДІ ---

def power_of_two_at_most(x: Fraction) -> Fraction:
    """Найбільше 2^k ≤ x (x > 0)."""
    k = x.numerator.bit_length() - x.denominator.bit_length()
    while Fraction(2) ** k > x:
        k -= 1
    while Fraction(2) ** (k + 1) <= x:
        k += 1
    return Fraction(2) ** k


def dyadic_root_between(low: Fraction, high: Fraction) -> Fraction:
    """Двійково-раціональне s ≥ 0 з low ≤ s² ≤ high; потребує 0 ≤ low < high."""
    if not 0 <= low < high:
        raise ValueError(f"Порожній інтервал [{float(low)}, {float(high)}]")
    k = max(0, (high.denominator.bit_length() - high.numerator.bit_length()) // 2 + 1)
    while True:
        s = Fraction(math.isqrt(high.numerator * 4 ** k // high.denominator), 2 ** k)
        if s * s >= low:
            return s
        k += 1


def primitive_direction(v: Vector) -> Vector:
    """Цілий вектор того ж напрямку з НСД елементів 1."""
    common = math.lcm(*(x.denominator for x in v))
    integers = [int(x * common) for x in v]
    divisor = math.gcd(*integers)
    return Vector.of([Fraction(n, divisor) for n in integers], NumericMode.EXACT)


def _direction(state: AdversaryState, w: Vector) -> Vector:
    vectors = list(state.q_constraints) + list(state.lossq_constraints) + [_ones(state.K), w]
    return primitive_direction(orthogonal_complement_vector(vectors, state.K, NumericMode.EXACT))


def _exact_step(state: AdversaryState, p: Vector, p_bar: Vector) -> Vector:
    # приріст s·p̄dᵀ, s = 2^k, d цілий: |елемент| ≤ margin/2
    direction = _direction(state, state.M_current.matrix.tmul_vec(p))
    state.margin = state.margin / 2
    s = power_of_two_at_most(state.margin / (2 * p_bar.norm_inf() * direction.norm_inf()))
    return direction.scale(s * p_bar.norm_sq())


def _approx_step(state: AdversaryState, p: Vector, p_bar: Vector) -> Optional[Vector]:
    # ᾱ‖M_tᵀp̄‖² ≤ ‖u‖² ≤ α‖M_tᵀp̄‖²
    direction = _direction(state, state.M_current.matrix.tmul_vec(p))
    anchor = state.M_current.matrix.tmul_vec(p_bar)
    if anchor.is_zero():
        logger.warning(f"Раунд {state.t + 1}: M_tᵀp̄ = 0, крок пропущено")
        return None
    ratio = anchor.norm_sq() / direction.norm_sq()
    s = dyadic_root_between(state.alpha_bar * ratio, state.alpha * ratio)
    return direction.scale(s)


def _respond(state: AdversaryState, kind: AdversaryKind, p: MixedStrategy, q: MixedStrategy) -> QueryRecord:
    if state.kind != kind:
        raise ValueError(f"Стан супротивника {state.kind.value} не підтримує відповідь {kind.value}")
    if state.t + 1 > state.horizon:
        raise AdversaryBudgetError(f"Вичерпано горизонт супротивника ({state.horizon})")
    if p.mode != NumericMode.EXACT or q.mode != NumericMode.EXACT:
        raise ModeMismatchError("Супротивник працює лише в точному режимі")
    K = state.K
    previous = span_distance_sq(_ones(K), state.lossq_span)

    _, p_bar = project_onto_span(p.weights, state.p_span)
    u = None
    if not p_bar.is_zero():
        state.p_span = extend_span(state.p_span, p.weights)
        if kind == AdversaryKind.EXACT_CASE:
            u = _exact_step(state, p.weights, p_bar)
        else:
            u = _approx_step(state, p.weights, p_bar)
    if u is not None:
        update = Matrix.outer(p_bar.scale(1 / p_bar.norm_sq()), u)
        state.M_current = GameMatrix(state.M_current.matrix + update, state.center.bounds)
        if kind == AdversaryKind.EXACT_CASE:
            state.inner_radius = state.radius - state.drift

    M = state.M_current.matrix
    loss_p = M.mul_vec(q.weights)
    loss_q = -M.tmul_vec(p.weights)
    state.q_constraints.append(q.weights)
    state.lossq_constraints.append(loss_q)
    state.lossq_span = extend_span(state.lossq_span, loss_q)
    state.t += 1
    record = QueryRecord(t=state.t, p=p, q=q, loss_p=loss_p, loss_q=loss_q)
    state.rounds.append(record)

    potential = span_distance_sq(_ones(K), state.lossq_span)
    row = TraceRow(
        t=state.t,
        u_norm_sq=u.norm_sq() if u is not None else Fraction(0),
        step_parameter=state.margin if kind == AdversaryKind.EXACT_CASE else state.alpha_bar,
        potential=potential,
        drift=state.drift,
        decay=potential / previous if previous else None,
    )
    state.trace.append(row)
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(f"Супротивник {kind.value}: раунд {state.t}, ‖u‖² ≈ {float(row.u_norm_sq):.3e}, потенціал ≈ {float(potential):.3e}")
    return record


def exact_respond(state: AdversaryState, p: MixedStrategy, q: MixedStrategy) -> QueryRecord:
    return _respond(state, AdversaryKind.EXACT_CASE, p, q)


def approx_respond(state: AdversaryState, p: MixedStrategy, q: MixedStrategy) -> QueryRecord:
    return _respond(state, AdversaryKind.APPROX_CASE, p, q)


class AdversarySession(Session):
    """Сесія, відповіді якої будує адаптивний супротивник."""

    def __init__(self, state: AdversaryState):
        super().__init__(state.K, NumericMode.EXACT, state.center.bounds)
        self.state = state
        self.kind = f"{state.kind.value}_adversary"

    def _respond(self, p: MixedStrategy, q: MixedStrategy) -> tuple[Vector, Vector]:
        if self.state.kind == AdversaryKind.EXACT_CASE:
            record = exact_respond(self.state, p, q)
        else:
            record = approx_respond(self.state, p, q)
        return record.loss_p, record.loss_q

    def reveal(self) -> GameMatrix:
        return self.state.M_current


def open_exact_session(K: int) -> AdversarySession:
    logger.info(f"Відкрито сесію точного супротивника K={K}")
    return AdversarySession(new_exact_adversary(K))


def open_approx_session(K: int, T: int) -> AdversarySession:
    logger.info(f"Відкрито сесію наближеного супротивника K={K}, T={T}")
    return AdversarySession(new_approx_adversary(K, T))


# --- ПОТЕНЦІАЛ ---

def distance_potential(state: AdversaryState, v) -> Fraction:
    v = Fraction(v)
    if v < 0:
        raise ValueError(f"v повинно бути невід'ємним, отримано {v}")
    return span_distance_sq(_ones(state.K).scale(v), state.lossq_span)


def terminal_potential_bound(K: int, T: int, alpha: Fraction, v=1) -> Fraction:
    """v²K(α/2)^{T+1}."""
    v = Fraction(v)
    return v * v * K * (Fraction(alpha) / 2) ** (T + 1)


def replay_consistent(state: AdversaryState, candidate: GameMatrix) -> bool:
    return replay(state.history, candidate)


# --- ПОШУК СВІДКА ---

def _candidates(state: AdversaryState, residual: Vector, others: Sequence[Vector], side: WitnessSide):
    for u in kernel_basis(list(others), state.K, NumericMode.EXACT):
        if side == WitnessSide.ROW:
            delta = Matrix.outer(residual, u)
        else:
            delta = Matrix.outer(u, residual)
        scale = state.inner_radius / delta.max_abs()
        for sign in (1, -1):
            yield delta.scale(sign * scale), sign * scale


def witness_search(state: AdversaryState, p_rec: MixedStrategy, q_rec: MixedStrategy) -> WitnessReport:
    """
    Перебирає M_T ± c·p̄uᵀ (u ⊥ q_{1:T}) та M_T ± c·u′q̄ᵀ (u′ ⊥ p_{1:T}) з ‖Δ‖ = inner_radius
    і повертає узгоджений з протоколом кандидат з найбільшим розривом рекомендації.
    """
    M_T = state.M_current
    best = WitnessReport(M_T, gap(M_T, p_rec, q_rec).gap, WitnessSide.CENTER, Fraction(0))

    _, p_bar = project_onto_span(p_rec.weights, state.p_span)
    q_span = span_of(state.q_constraints, state.K)
    _, q_bar = project_onto_span(q_rec.weights, q_span)

    sides = []
    if not p_bar.is_zero():
        sides.append((WitnessSide.ROW, p_bar, state.q_constraints))
    if not q_bar.is_zero():
        sides.append((WitnessSide.COLUMN, q_bar, list(state.p_span.vectors)))
    if not sides:
        logger.info("Рекомендація лежить у лінійних оболонках запитів: свідком є сама M_T")

    history = state.history
    for side, residual, others in sides:
        for delta, scale in _candidates(state, residual, others, side):
            try:
                candidate = GameMatrix(M_T.matrix + delta, state.center.bounds)
            except BoundsViolationError:
                logger.warning(f"Кандидат {side.value} виходить за межі елементів, пропущено")
                continue
            if (candidate.matrix - state.center.matrix).max_abs() > state.radius:
                continue
            if not replay(history, candidate):
                raise RuntimeError("Кандидат-свідок не відтворює протокол")
            value = gap(candidate, p_rec, q_rec).gap
            if value > best.gap:
                best = WitnessReport(candidate, value, side, scale)
    return best


# --- АНАЛІЗ РАНГУ ОБМЕЖЕНЬ ---

def query_constraints(p: Vector, q: Vector) -> list[list[Fraction]]:
    """2K лінійних обмежень на vec(M): (Mq)_i та (Mᵀp)_j; індекс елемента M[i][j] = i·K + j."""
    K = p.dim
    rows = []
    for i in range(K):
        row = [Fraction(0)] * (K * K)
        for j in range(K):
            row[i * K + j] = q[j]
        rows.append(row)
    for j in range(K):
        row = [Fraction(0)] * (K * K)
        for i in range(K):
            row[i * K + j] = p[i]
        rows.append(row)
    return rows


def constraint_rank_analyzer(queries: Sequence[tuple], K: int) -> list[tuple[int, int]]:
    """Після кожного запиту: (приріст рангу, розмірність ядра) системи в просторі K²."""
    if not queries:
        raise ValueError("Потрібен щонайменше один запит")
    width = K * K
    rows: list[list[Fraction]] = []
    rank = 0
    report = []
    for p, q in queries:
        p = p.weights if isinstance(p, MixedStrategy) else p
        q = q.weights if isinstance(q, MixedStrategy) else q
        if p.mode != NumericMode.EXACT or q.mode != NumericMode.EXACT:
            raise ModeMismatchError("Аналіз рангу потребує точного режиму")
        rows.extend(query_constraints(p, q))
        new_rank = matrix_rank(rows, width, NumericMode.EXACT)
        report.append((new_rank - rank, width - new_rank))
        rank = new_rank
    return report
