# learners.py

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

import numpy as np

from numerics import Matrix, NumericMode, Scalar, Vector, to_scalar
from game_core import (
    GameMatrix, MixedStrategy, average_strategies, rationalize, solve_exact,
)
from oracle import LearnerView, Session, Transcript, learner_view
from recovery import Alphabet, assemble_matrix, probe_recovery

logger = logging.getLogger(__name__)

DEFAULT_ETA = Fraction(1, 4)

Recommendation = tuple[MixedStrategy, MixedStrategy]


class LearnerKind(str, Enum):
    UNIFORM = "uniform"
    TWO_QUERY = "two_query"
    BASIS_RECOVERY = "basis_recovery"
    FICTITIOUS_PLAY = "fictitious_play"
    OPTIMISTIC_MWU = "optimistic_mwu"
    PROBE_DECODE = "probe_decode"
    RANDOM_QUERY = "random_query"


# Мінімальна кількість запитів для кожного виду (None: залежить від K)
MIN_HORIZON = {
    LearnerKind.UNIFORM: 0,
    LearnerKind.TWO_QUERY: 2,
    LearnerKind.BASIS_RECOVERY: None,
    LearnerKind.FICTITIOUS_PLAY: 1,
    LearnerKind.OPTIMISTIC_MWU: 1,
    LearnerKind.PROBE_DECODE: 1,
    LearnerKind.RANDOM_QUERY: 1,
}


@dataclass(frozen=True)
class LearnerConfig:
    kind: LearnerKind
    horizon: int = 0
    eta: Scalar = DEFAULT_ETA
    seed: int = 0
    allow_partial: bool = False
    prior: Optional[GameMatrix] = None
    alphabet: Optional[Alphabet] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "kind", LearnerKind(self.kind))
        if self.horizon < 0:
            raise ValueError(f"Горизонт повинен бути невід'ємним, отримано {self.horizon}")
        if self.eta <= 0:
            raise ValueError(f"eta повинно бути додатним, отримано {self.eta}")
        minimum = MIN_HORIZON[self.kind]
        if minimum is not None and self.horizon < minimum:
            raise ValueError(f"Для {self.kind.value} потрібен горизонт ≥ {minimum}, отримано {self.horizon}")
        if self.kind == LearnerKind.PROBE_DECODE and self.alphabet is None:
            raise ValueError("Для probe_decode потрібен алфавіт")


def _strategy(values, session: LearnerView) -> MixedStrategy:
    """Float-ваги у стратегію режиму сесії."""
    if session.mode == NumericMode.EXACT:
        return rationalize(values)
    weights = np.asarray(values, dtype=float)
    weights = weights / weights.sum()
    return MixedStrategy(Vector.of(weights.tolist(), NumericMode.FLOAT))


def _average_queries(session: LearnerView) -> Recommendation:
    rounds = session.rounds
    return (
        average_strategies([r.p for r in rounds]),
        average_strategies([r.q for r in rounds]),
    )


# --- СТРАТЕГІЇ НАВЧАННЯ ---

def uniform_learner(session: Session) -> Recommendation:
    session = learner_view(session)
    u = MixedStrategy.uniform(session.K, session.mode)
    return u, u


def two_query_learner(session: Session) -> Recommendation:
    session = learner_view(session)
    K, mode = session.K, session.mode
    uniform = MixedStrategy.uniform(K, mode)
    first = session.query(MixedStrategy.pure(K, 0, mode), uniform)
    j_star = (-first.loss_q).argmax()
    second = session.query(uniform, MixedStrategy.pure(K, j_star, mode))
    i_star = second.loss_p.argmin()
    half = to_scalar(Fraction(1, 2), mode)
    p = MixedStrategy((Vector.basis(K, 0, mode) + Vector.basis(K, i_star, mode)).scale(half))
    logger.debug(f"two_query: j*={j_star}, i*={i_star}")
    return p, MixedStrategy.pure(K, j_star, mode)


def _solve(M: GameMatrix) -> Recommendation:
    if M.mode == NumericMode.EXACT:
        solution = solve_exact(M)
        return solution.p_star, solution.q_star
    solution = solve_exact(M.to_mode(NumericMode.EXACT))
    return (
        MixedStrategy(solution.p_star.weights.to_mode(NumericMode.FLOAT)),
        MixedStrategy(solution.q_star.weights.to_mode(NumericMode.FLOAT)),
    )


def basis_recovery_learner(session: Session, horizon: Optional[int] = None, allow_partial: bool = False,
                           prior: Optional[GameMatrix] = None) -> Recommendation:
    """
    Запити (e_t, e_t), t = 1..K, відновлення M і точний розв'язок.
    З allow_partial бюджет може бути меншим за K: невідомі елементи беруться з prior.
    """
    session = learner_view(session)
    K = session.K
    budget = K if horizon is None else horizon
    if budget < K and not allow_partial:
        raise ValueError(f"Горизонт {budget} менший за K = {K}")
    count = min(K, budget)
    if count == 0:
        M = prior if prior is not None else GameMatrix(Matrix.zeros(K, session.mode), session.bounds)
        return _solve(M)
    records = []
    for t in range(count):
        e = MixedStrategy.pure(K, t, session.mode)
        records.append(session.query(e, e))
    M = assemble_matrix(records, K, session.bounds, prior)
    return _solve(M)


def fictitious_play_learner(session: Session, T: int) -> Recommendation:
    """Обидва гравці відповідають найкраще на середні спостережувані втрати; старт e₁/e₁."""
    session = learner_view(session)
    if T < 1:
        raise ValueError(f"T повинно бути ≥ 1, отримано {T}")
    K, mode = session.K, session.mode
    p = q = MixedStrategy.pure(K, 0, mode)
    cum_p = Vector.zeros(K, mode)
    cum_q = Vector.zeros(K, mode)
    for _ in range(T):
        record = session.query(p, q)
        cum_p = cum_p + record.loss_p
        cum_q = cum_q + record.loss_q
        p = MixedStrategy.pure(K, cum_p.argmin(), mode)
        q = MixedStrategy.pure(K, cum_q.argmin(), mode)
    return _average_queries(session)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def optimistic_mwu_learner(session: Session, T: int, eta=DEFAULT_ETA) -> Recommendation:
    """
    Оптимістичні експоненційні ваги для обох гравців:
    x_{t+1} ∝ exp(−eta·(сумарні втрати + останні втрати)), обчислення в лог-домені.
    """
    session = learner_view(session)
    if T < 1:
        raise ValueError(f"T повинно бути ≥ 1, отримано {T}")
    eta = float(eta)
    if eta <= 0:
        raise ValueError(f"eta повинно бути додатним, отримано {eta}")
    K = session.K
    cum_p, cum_q = np.zeros(K), np.zeros(K)
    last_p, last_q = np.zeros(K), np.zeros(K)
    for _ in range(T):
        p = _strategy(_softmax(-eta * (cum_p + last_p)), session)
        q = _strategy(_softmax(-eta * (cum_q + last_q)), session)
        record = session.query(p, q)
        last_p = record.loss_p.to_numpy()
        last_q = record.loss_q.to_numpy()
        cum_p += last_p
        cum_q += last_q
    return _average_queries(session)


def random_query_learner(session: Session, T: int, seed: int = 0) -> Recommendation:
    """Випадкові запити з Діріхле(1,…,1); рекомендує середні."""
    session = learner_view(session)
    if T < 1:
        raise ValueError(f"T повинно бути ≥ 1, отримано {T}")
    rng = np.random.default_rng(seed)
    for _ in range(T):
        p = _strategy(rng.dirichlet(np.ones(session.K)), session)
        q = _strategy(rng.dirichlet(np.ones(session.K)), session)
        session.query(p, q)
    return _average_queries(session)


def probe_decode_learner(session: Session, alphabet: Alphabet) -> Recommendation:
    session = learner_view(session)
    M = probe_recovery(session, alphabet)
    return _solve(M)


# --- СЕРТИФІКАТ ---

def gap_certificate(transcript: Transcript) -> Scalar:
    """
    Σ_t ⟨p_t, ℓ_t^(p)⟩ − Σ_t min_i ℓ_t^(p) + Σ_t ⟨q_t, ℓ_t^(q)⟩ − Σ_t min_j ℓ_t^(q).
    Обчислюється лише з протоколу; не менше за T·g(M, p̂_T, q̂_T).
    """
    if not transcript.rounds:
        raise ValueError("Сертифікат не визначено для порожнього протоколу")
    total = to_scalar(0, transcript.mode)
    for r in transcript.rounds:
        total += r.p.weights.dot(r.loss_p) - min(r.loss_p)
        total += r.q.weights.dot(r.loss_q) - min(r.loss_q)
    return total


def run_learner(config: LearnerConfig, session: Session) -> Transcript:
    """Навчання отримує лише LearnerView; прихована матриця лишається в сесії."""
    session = learner_view(session)
    kind = config.kind
    if kind == LearnerKind.UNIFORM:
        p, q = uniform_learner(session)
    elif kind == LearnerKind.TWO_QUERY:
        p, q = two_query_learner(session)
    elif kind == LearnerKind.BASIS_RECOVERY:
        horizon = config.horizon if config.horizon else None
        p, q = basis_recovery_learner(session, horizon, config.allow_partial, config.prior)
    elif kind == LearnerKind.FICTITIOUS_PLAY:
        p, q = fictitious_play_learner(session, config.horizon)
    elif kind == LearnerKind.OPTIMISTIC_MWU:
        p, q = optimistic_mwu_learner(session, config.horizon, config.eta)
    elif kind == LearnerKind.PROBE_DECODE:
        p, q = probe_decode_learner(session, config.alphabet)
    elif kind == LearnerKind.RANDOM_QUERY:
        p, q = random_query_learner(session, config.horizon, config.seed)
    else:
        raise ValueError(f"Невідомий вид навчання: {kind}")
    logger.info(f"Навчання {kind.value}: {session.queries_used} запитів, K={session.K}")
    return session.finalize(p, q)
