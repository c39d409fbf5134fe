# oracle.py

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

from numerics import NumericMode, Scalar, Vector, to_scalar, DimensionMismatchError, ModeMismatchError
from game_core import GameMatrix, MixedStrategy, average_strategies, InvalidStrategyError

logger = logging.getLogger(__name__)


class SessionClosedError(ValueError):
    pass


class BudgetExceededError(ValueError):
    pass


class OracleInconsistencyError(ValueError):
    pass


@dataclass(frozen=True)
class QueryRecord:
    t: int
    p: MixedStrategy
    q: MixedStrategy
    loss_p: Vector
    loss_q: Vector


@dataclass(frozen=True)
class Transcript:
    K: int
    mode: NumericMode
    oracle_kind: str
    rounds: tuple = ()
    recommendation: Optional[tuple] = None

    def __post_init__(self):
        for index, record in enumerate(self.rounds, start=1):
            if record.t != index:
                raise ValueError(f"Порушено нумерацію раундів: очікувався {index}, отримано {record.t}")

    @property
    def T(self) -> int:
        return len(self.rounds)

    def average_plays(self) -> tuple[MixedStrategy, MixedStrategy]:
        """Середні запити (p̂_T, q̂_T)."""
        if not self.rounds:
            raise ValueError("Порожній протокол")
        return (
            average_strategies([r.p for r in self.rounds]),
            average_strategies([r.q for r in self.rounds]),
        )


class Session(ABC):
    """
    Сесія першого порядку: відповідає на запити (p, q) векторами втрат (Mq, −Mᵀp).
    Прихована матриця назовні не видається; межі елементів є публічною інформацією.
    """
    kind = "abstract"

    def __init__(self, K: int, mode: NumericMode, bounds: tuple, budget: Optional[int] = None):
        self.K = K
        self.mode = mode
        self.bounds = bounds
        self.budget = budget
        self._rounds: list[QueryRecord] = []
        self._transcript: Optional[Transcript] = None

    @property
    def queries_used(self) -> int:
        return len(self._rounds)

    @property
    def closed(self) -> bool:
        return self._transcript is not None

    @property
    def rounds(self) -> tuple:
        return tuple(self._rounds)

    def _validate(self, s: MixedStrategy, name: str):
        if not isinstance(s, MixedStrategy):
            raise InvalidStrategyError(f"{name} не є змішаною стратегією")
        if s.K != self.K:
            raise DimensionMismatchError(f"{name}: розмірність {s.K} ≠ {self.K}")
        if s.mode != self.mode:
            raise ModeMismatchError(f"{name}: режим {s.mode.value} ≠ {self.mode.value}")

    @abstractmethod
    def _respond(self, p: MixedStrategy, q: MixedStrategy) -> tuple[Vector, Vector]:
        ...

    def query(self, p: MixedStrategy, q: MixedStrategy) -> QueryRecord:
        if self.closed:
            raise SessionClosedError("Сесію вже завершено")
        self._validate(p, "p")
        self._validate(q, "q")
        if self.budget is not None and self.queries_used >= self.budget:
            raise BudgetExceededError(f"Вичерпано бюджет запитів ({self.budget})")
        loss_p, loss_q = self._respond(p, q)
        record = QueryRecord(t=self.queries_used + 1, p=p, q=q, loss_p=loss_p, loss_q=loss_q)
        self._rounds.append(record)
        return record

    def finalize(self, p: MixedStrategy, q: MixedStrategy) -> Transcript:
        if self.closed:
            raise SessionClosedError("Сесію вже завершено")
        self._validate(p, "p")
        self._validate(q, "q")
        self._transcript = Transcript(
            K=self.K, mode=self.mode, oracle_kind=self.kind,
            rounds=tuple(self._rounds), recommendation=(p, q),
        )
        logger.info(f"Сесію {self.kind} завершено після {self.queries_used} запитів")
        return self._transcript

    @property
    def transcript(self) -> Optional[Transcript]:
        return self._transcript

    @abstractmethod
    def reveal(self) -> GameMatrix:
        """Поточна прихована матриця; використовується лише для оцінювання."""


class FixedSession(Session):
    kind = "fixed"

    def __init__(self, M: GameMatrix, budget: Optional[int] = None):
        super().__init__(M.K, M.mode, M.bounds, budget)
        self._matrix = M

    def _respond(self, p: MixedStrategy, q: MixedStrategy) -> tuple[Vector, Vector]:
        return self._matrix.matrix.mul_vec(q.weights), -self._matrix.matrix.tmul_vec(p.weights)

    def reveal(self) -> GameMatrix:
        return self._matrix


def open_fixed_session(M: GameMatrix, budget: Optional[int] = None) -> FixedSession:
    logger.info(f"Відкрито фіксовану сесію K={M.K}, режим {M.mode.value}")
    return FixedSession(M, budget)


class LearnerView:
    """
    Сесія з боку навчання: K, режим, межі, бюджет, власні запити, query та finalize.
    reveal() і стан супротивника лишаються в сесії оцінювача.
    """
    __slots__ = ("_session",)

    def __init__(self, session: Session):
        self._session = session

    @property
    def K(self) -> int:
        return self._session.K

    @property
    def mode(self) -> NumericMode:
        return self._session.mode

    @property
    def bounds(self) -> tuple:
        return self._session.bounds

    @property
    def budget(self) -> Optional[int]:
        return self._session.budget

    @property
    def queries_used(self) -> int:
        return self._session.queries_used

    @property
    def rounds(self) -> tuple:
        return self._session.rounds

    def query(self, p: MixedStrategy, q: MixedStrategy) -> QueryRecord:
        return self._session.query(p, q)

    def finalize(self, p: MixedStrategy, q: MixedStrategy) -> Transcript:
        return self._session.finalize(p, q)


def learner_view(session) -> LearnerView:
    if isinstance(session, LearnerView):
        return session
    return LearnerView(session)


def query(session: Session, p: MixedStrategy, q: MixedStrategy) -> QueryRecord:
    return session.query(p, q)


def finalize(session: Session, p: MixedStrategy, q: MixedStrategy) -> Transcript:
    return session.finalize(p, q)


# --- ПЕРЕВІРКИ ПРОТОКОЛУ ---

def replay(transcript: Transcript, M: GameMatrix) -> bool:
    """Чи відтворює M кожну записану відповідь біт-у-біт."""
    for record in transcript.rounds:
        if M.matrix.mul_vec(record.q.weights) != record.loss_p:
            return False
        if -M.matrix.tmul_vec(record.p.weights) != record.loss_q:
            return False
    return True


def regret_sum(transcript: Transcript) -> Scalar:
    """Сума регретів відносно найкращої фіксованої дії заднім числом (= T·g для фіксованої M)."""
    if not transcript.rounds:
        raise ValueError("Регрет не визначено для порожнього протоколу")
    mode = transcript.mode
    cum_p = Vector.zeros(transcript.K, mode)
    cum_q = Vector.zeros(transcript.K, mode)
    played = to_scalar(0, mode)
    for r in transcript.rounds:
        cum_p = cum_p + r.loss_p
        cum_q = cum_q + r.loss_q
        played += r.p.weights.dot(r.loss_p) + r.q.weights.dot(r.loss_q)
    return played - min(cum_p) - min(cum_q)
