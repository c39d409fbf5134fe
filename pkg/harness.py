# harness.py

import dataclasses
import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from numerics import NumericMode, Scalar, Vector, format_scalar
from game_core import (
    GameMatrix, MixedStrategy, gap, min_support, random_matrix, sample_ball_matrix, solve_exact,
)
from oracle import Transcript, open_fixed_session, replay
from learners import LearnerConfig, LearnerKind, gap_certificate, run_learner
from adversary import (
    AdversarySession, open_approx_session, open_exact_session, terminal_potential_bound, witness_search,
)
from recovery import Alphabet, alphabet_matrix, decode_matrix, encode_probe
from bounds import DEFAULT_UPPER_C, guard_eps, invert_query_bound, lower_eps, lower_T, theoretical_bounds, upper_T
from formats import dump_matrix, trace_row_to_dict, write_json, write_jsonl, write_transcript

logger = logging.getLogger(__name__)

DECIMAL_FORMAT = "{:.12g}"


class OracleKind(str, Enum):
    FIXED = "fixed"
    EXACT_ADVERSARY = "exact_adversary"
    APPROX_ADVERSARY = "approx_adversary"


@dataclass(frozen=True)
class ExperimentConfig:
    oracle: OracleKind
    learner: LearnerConfig
    K: int
    mode: NumericMode = NumericMode.EXACT
    repetitions: int = 1
    matrix: Optional[GameMatrix] = None
    oracle_T: Optional[int] = None
    seed: int = 0
    output_dir: Optional[str] = None
    upper_c: Scalar = DEFAULT_UPPER_C
    checkpoints: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "oracle", OracleKind(self.oracle))
        object.__setattr__(self, "mode", NumericMode(self.mode))
        if self.K < 1:
            raise ValueError(f"K повинно бути ≥ 1, отримано {self.K}")
        if self.repetitions < 1:
            raise ValueError(f"Кількість повторень повинна бути ≥ 1, отримано {self.repetitions}")
        if self.oracle != OracleKind.FIXED and self.mode != NumericMode.EXACT:
            raise ValueError("Супротивники працюють лише в точному режимі")
        if self.oracle == OracleKind.APPROX_ADVERSARY and self.oracle_T is None:
            raise ValueError("Для approx_adversary потрібен горизонт oracle_T")
        if self.matrix is not None:
            if self.matrix.K != self.K:
                raise ValueError(f"Матриця {self.matrix.K}×{self.matrix.K} не відповідає K = {self.K}")
            if self.matrix.mode != self.mode:
                object.__setattr__(self, "matrix", self.matrix.to_mode(self.mode))


@dataclass
class RunRecord:
    repetition: int
    oracle: str
    learner: str
    K: int
    mode: str
    queries_used: int
    gap: Scalar
    certificate: Optional[Scalar]
    witness_side: Optional[str] = None
    trace: list = field(default_factory=list)
    trajectory: list = field(default_factory=list)
    transcript: Optional[Transcript] = None
    graded: Optional[GameMatrix] = None

    def to_dict(self) -> dict:
        return {
            "repetition": self.repetition,
            "oracle": self.oracle,
            "learner": self.learner,
            "K": self.K,
            "mode": self.mode,
            "queries_used": self.queries_used,
            "gap": format_scalar(self.gap),
            "gap_decimal": DECIMAL_FORMAT.format(float(self.gap)),
            "certificate": format_scalar(self.certificate) if self.certificate is not None else None,
            "witness_side": self.witness_side,
            "trace": self.trace,
        }


# --- ТРАЄКТОРІЇ ---

def default_checkpoints(T: int) -> list[int]:
    points = []
    t = 1
    while t < T:
        points.append(t)
        t *= 2
    if T >= 1:
        points.append(T)
    return points


def gap_trajectory(transcript: Transcript, M: GameMatrix,
                   checkpoints: Optional[Sequence[int]] = None) -> list[tuple[int, Scalar]]:
    """Розрив поточних середніх (p̂_t, q̂_t) на заданих кроках t."""
    if not transcript.rounds:
        return []
    wanted = set(checkpoints or default_checkpoints(transcript.T))
    mode = transcript.mode
    sum_p = Vector.zeros(transcript.K, mode)
    sum_q = Vector.zeros(transcript.K, mode)
    result = []
    for record in transcript.rounds:
        sum_p = sum_p + record.p.weights
        sum_q = sum_q + record.q.weights
        if record.t in wanted:
            factor = Fraction(1, record.t) if mode == NumericMode.EXACT else 1.0 / record.t
            p_avg, q_avg = sum_p.scale(factor), sum_q.scale(factor)
            if mode == NumericMode.FLOAT:
                p_avg, q_avg = p_avg.scale(1.0 / p_avg.total()), q_avg.scale(1.0 / q_avg.total())
            result.append((record.t, gap(M, MixedStrategy(p_avg), MixedStrategy(q_avg)).gap))
    return result


# --- ЕКСПЕРИМЕНТИ ---

def _open_session(config: ExperimentConfig, rng: np.random.Generator):
    if config.oracle == OracleKind.FIXED:
        M = config.matrix if config.matrix is not None else random_matrix(config.K, rng, config.mode)
        return open_fixed_session(M)
    if config.oracle == OracleKind.EXACT_ADVERSARY:
        return open_exact_session(config.K)
    return open_approx_session(config.K, config.oracle_T)


def run_experiment(config: ExperimentConfig) -> list[RunRecord]:
    logger.info(
        f"Експеримент: {config.oracle.value} + {config.learner.kind.value}, K={config.K}, "
        f"повторень {config.repetitions}"
    )
    records = []
    for repetition in range(config.repetitions):
        seed = config.seed + repetition
        rng = np.random.default_rng(seed)
        session = _open_session(config, rng)
        learner = dataclasses.replace(config.learner, seed=config.learner.seed + repetition)
        transcript = run_learner(learner, session)
        p_rec, q_rec = transcript.recommendation

        witness_side = None
        trace = []
        if isinstance(session, AdversarySession):
            report = witness_search(session.state, p_rec, q_rec)
            value = report.gap
            witness_side = report.direction_kind.value
            trace = [trace_row_to_dict(row) for row in session.state.trace]
            graded = report.witness
        else:
            graded = session.reveal()
            value = gap(graded, p_rec, q_rec).gap
        certificate = gap_certificate(transcript) if transcript.T else None
        record = RunRecord(
            repetition=repetition,
            oracle=config.oracle.value,
            learner=learner.kind.value,
            K=config.K,
            mode=config.mode.value,
            queries_used=transcript.T,
            gap=value,
            certificate=certificate,
            witness_side=witness_side,
            trace=trace,
            trajectory=gap_trajectory(transcript, graded, config.checkpoints),
            transcript=transcript,
            graded=graded,
        )
        records.append(record)
        logger.debug(f"Повторення {repetition}: розрив ≈ {float(record.gap):.6g}, запитів {record.queries_used}")

    if config.output_dir:
        write_results(records, config.output_dir)
    logger.info(f"Експеримент завершено: {len(records)} записів")
    return records


def summarize(records: Sequence[RunRecord]) -> dict:
    gaps = [float(r.gap) for r in records]
    return {
        "runs": len(records),
        "oracle": sorted({r.oracle for r in records}),
        "learner": sorted({r.learner for r in records}),
        "queries_used_max": max(r.queries_used for r in records),
        "gap_max": format_scalar(max(r.gap for r in records)),
        "gap_max_decimal": DECIMAL_FORMAT.format(max(gaps)),
        "gap_mean_decimal": DECIMAL_FORMAT.format(float(np.mean(gaps))),
    }


def write_results(records: Sequence[RunRecord], output_dir: str):
    if not records:
        raise ValueError("Немає записів для збереження")
    os.makedirs(output_dir, exist_ok=True)
    write_jsonl((r.to_dict() for r in records), os.path.join(output_dir, "records.jsonl"))
    write_json(summarize(records), os.path.join(output_dir, "summary.json"))
    traces = [
        {"repetition": r.repetition, **row}
        for r in records for row in r.trace
    ]
    if traces:
        write_jsonl(traces, os.path.join(output_dir, "adversary_trace.jsonl"))
    # протокол і матриця оцінювання: розрив можна перерахувати з файлів
    for r in records:
        if r.transcript is not None:
            write_transcript(r.transcript, os.path.join(output_dir, f"transcript_{r.repetition}.jsonl"))
        if r.graded is not None:
            dump_matrix(r.graded, os.path.join(output_dir, f"matrix_{r.repetition}.json"))


# --- КРИВІ ---

def bounds_table(K: int, eps_values: Sequence, c: Scalar = DEFAULT_UPPER_C) -> pd.DataFrame:
    rows = []
    for eps in eps_values:
        record = theoretical_bounds(K, eps=eps, c=c)
        rows.append({
            "K": K,
            "eps": DECIMAL_FORMAT.format(float(eps)),
            "eps_exact": format_scalar(Fraction(eps)),
            "upper_T": DECIMAL_FORMAT.format(record.upper_T),
            "lower_T": DECIMAL_FORMAT.format(record.lower_T),
            "exact_lower_T": record.exact_lower_T,
            "guard_region": float(eps) <= guard_eps(K),
        })
    return pd.DataFrame(rows, columns=["K", "eps", "eps_exact", "upper_T", "lower_T", "exact_lower_T", "guard_region"])


def trajectory_table(records: Sequence[RunRecord]) -> pd.DataFrame:
    rows = [
        {
            "learner": r.learner,
            "oracle": r.oracle,
            "repetition": r.repetition,
            "T": t,
            "gap": DECIMAL_FORMAT.format(float(value)),
            "gap_exact": format_scalar(value),
        }
        for r in records for t, value in r.trajectory
    ]
    return pd.DataFrame(rows, columns=["learner", "oracle", "repetition", "T", "gap", "gap_exact"])


def default_eps_values(count: int = 20) -> list[Fraction]:
    return [Fraction(1, 2 ** k) for k in range(1, count + 1)]


def emit_curves(records: Sequence[RunRecord], output_dir: str, K: Optional[int] = None,
                eps_values: Optional[Sequence] = None, c: Scalar = DEFAULT_UPPER_C) -> list[str]:
    """bounds.csv (ε, upper_T, lower_T) та trajectories.csv (T, розрив) для кожного навчання."""
    if not records:
        raise ValueError("Немає результатів для побудови кривих")
    os.makedirs(output_dir, exist_ok=True)
    K = K or records[0].K
    bounds_path = os.path.join(output_dir, "bounds.csv")
    bounds_table(K, eps_values or default_eps_values(), c).to_csv(bounds_path, index=False)
    trajectories_path = os.path.join(output_dir, "trajectories.csv")
    trajectory_table(records).to_csv(trajectories_path, index=False)
    logger.info(f"Криві записано у {output_dir}")
    return [bounds_path, trajectories_path]


# --- НАБІР ПЕРЕВІРОК ---

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _check_gap_oracle(quick: bool) -> str:
    count = 0
    for signs in product((-1, 1), repeat=9):
        if quick and count >= 64:
            break
        M = GameMatrix.from_rows([signs[0:3], signs[3:6], signs[6:9]])
        solution = solve_exact(M)
        report = gap(M, solution.p_star, solution.q_star)
        assert report.gap == 0, f"розрив {report.gap} для рівноваги"
        u = MixedStrategy.uniform(3)
        assert gap(M, u, u).gap >= 0
        count += 1
    return f"{count} матриць"


def _check_uniform(quick: bool) -> str:
    M = GameMatrix.from_rows([[1, -1], [1, -1]])
    u = MixedStrategy.uniform(2)
    assert gap(M, u, u).gap == 1
    rng = np.random.default_rng(0)
    trials = 20 if quick else 1000
    for _ in range(trials):
        M = random_matrix(8, rng)
        u = MixedStrategy.uniform(8)
        assert gap(M, u, u).gap <= 2 * (1 - Fraction(1, 8))
    return f"{trials} випадкових матриць K=8"


def _check_two_query(quick: bool) -> str:
    rng = np.random.default_rng(1)
    trials = 20 if quick else 1000
    for lo, limit in ((0, 1), (-1, 2)):
        for _ in range(trials):
            M = random_matrix(8, rng, lo=lo, hi=1)
            transcript = run_learner(LearnerConfig(LearnerKind.TWO_QUERY, horizon=2), open_fixed_session(M))
            p, q = transcript.recommendation
            assert transcript.T == 2
            assert gap(M, p, q).gap <= limit
    return f"{2 * trials} запусків"


def _check_certificate(quick: bool) -> str:
    K = 8 if quick else 16
    horizons = (16, 64) if quick else (64, 512)
    seeds = range(3 if quick else 20)
    kinds = (LearnerKind.OPTIMISTIC_MWU,) if quick else (LearnerKind.OPTIMISTIC_MWU, LearnerKind.FICTITIOUS_PLAY)
    for kind, seed in product(kinds, seeds):
        M = random_matrix(K, np.random.default_rng(seed), NumericMode.FLOAT)
        gaps = []
        for T in horizons:
            transcript = run_learner(LearnerConfig(kind, horizon=T), open_fixed_session(M))
            p, q = transcript.recommendation
            value = gap(M, p, q).gap
            assert T * value <= gap_certificate(transcript) + 1e-8
            gaps.append(value)
        assert gaps[-1] < gaps[0], f"{kind.value}, seed {seed}: розрив не зменшився {gaps}"
    return f"K={K}, T∈{horizons}"


def _check_exact_adversary(quick: bool) -> str:
    K = 8 if quick else 16
    session = open_exact_session(K)
    T = session.state.horizon
    transcript = run_learner(LearnerConfig(LearnerKind.RANDOM_QUERY, horizon=T, seed=3), session)
    state = session.state
    assert replay(state.history, state.M_current)
    assert all(row.potential > 0 for row in state.trace)
    assert all(abs(x) < 1 for row in state.M_current.matrix.rows for x in row)
    p, q = transcript.recommendation
    assert witness_search(state, p, q).gap > 0
    return f"K={K}, T={T}"


def _check_approx_adversary(quick: bool) -> str:
    session = open_approx_session(8, 2)
    transcript = run_learner(LearnerConfig(LearnerKind.BASIS_RECOVERY, horizon=2, allow_partial=True), session)
    state = session.state
    for row in state.trace:
        if row.decay is not None:
            assert row.decay >= state.alpha_bar / 2
    assert state.trace[-1].potential >= terminal_potential_bound(8, 2, state.alpha_bar)
    assert state.drift <= state.radius / 2
    p, q = transcript.recommendation
    assert witness_search(state, p, q).gap > 0
    return "K=8, T=2"


def _check_recovery(quick: bool) -> str:
    rng = np.random.default_rng(2)
    alphabets = [Alphabet.of([0, 1]), Alphabet.of([-1, 0, 1]), Alphabet.of(range(-4, 5), 4)]
    trials = 10 if quick else 1000
    for alphabet in alphabets:
        for _ in range(trials):
            K = int(rng.integers(1, 9 if quick else 17))
            M = alphabet_matrix(alphabet, K, rng)
            probe = encode_probe(alphabet, K)
            decoded = decode_matrix(alphabet, K, M.matrix.tmul_vec(probe.weights))
            assert decoded.matrix == M.matrix
    return f"{len(alphabets) * trials} декодувань"


def _check_support(quick: bool) -> str:
    rng = np.random.default_rng(4)
    trials = 5 if quick else 100
    for K in (2, 4, 8):
        for _ in range(trials):
            M = sample_ball_matrix(K, Fraction(1, 16 * K * K), rng)
            solution = solve_exact(M)
            assert min_support(solution.p_star, solution.q_star) >= Fraction(1, 2 * K)
            assert solution.value >= Fraction(1, 4 * K)
    return f"{3 * trials} матриць"


def _check_bounds(quick: bool) -> str:
    assert lower_eps(8, 2) == Fraction(1, 2 ** 64)
    for K in range(5, 65):
        eps = guard_eps(K) / 2
        assert lower_T(K, eps) <= upper_T(K, eps)
    assert abs(invert_query_bound(1, 1, np.exp(-np.e)) - np.e) < 1e-9
    return "формули"


CHECKS: list[tuple[str, Callable[[bool], str]]] = [
    ("gap_oracle", _check_gap_oracle),
    ("uniform_play", _check_uniform),
    ("two_query", _check_two_query),
    ("online_to_batch_certificate", _check_certificate),
    ("exact_adversary", _check_exact_adversary),
    ("approx_adversary", _check_approx_adversary),
    ("matrix_recovery", _check_recovery),
    ("support_and_value", _check_support),
    ("bound_formulas", _check_bounds),
]


def verify_suite(quick: bool = True) -> list[CheckResult]:
    results = []
    for name, check in CHECKS:
        try:
            detail = check(quick)
            results.append(CheckResult(name, True, detail))
            logger.info(f"Перевірка {name}: OK ({detail})")
        except AssertionError as e:
            results.append(CheckResult(name, False, str(e) or "порушено властивість"))
            logger.error(f"Перевірка {name}: ПРОВАЛ {e}")
        except ValueError as e:
            results.append(CheckResult(name, False, f"{type(e).__name__}: {e}"))
            logger.error(f"Перевірка {name}: ПОМИЛКА {e}")
    return results
