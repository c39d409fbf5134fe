# formats.py

import json
import logging
import os
from typing import Iterable, Optional

from numerics import Matrix, NumericMode, Vector, format_scalar, parse_scalar
from game_core import GameMatrix, MixedStrategy
from oracle import QueryRecord, Transcript
from recovery import Alphabet, InvalidAlphabetError

logger = logging.getLogger(__name__)


# --- МАТРИЦІ ---

def matrix_to_dict(M: GameMatrix) -> dict:
    return {
        "K": M.K,
        "mode": M.mode.value,
        "bounds": [format_scalar(b) for b in M.bounds],
        "rows": M.matrix.to_strings(),
    }


def matrix_from_dict(data: dict, mode: Optional[NumericMode] = None) -> GameMatrix:
    try:
        mode = NumericMode(mode or data.get("mode", NumericMode.EXACT.value))
        rows = [[parse_scalar(x, mode) for x in row] for row in data["rows"]]
        bounds = tuple(parse_scalar(b, mode) for b in data.get("bounds", ["-1", "1"]))
    except (KeyError, TypeError) as e:
        raise ValueError(f"Некоректний опис матриці: {e}")
    M = GameMatrix(Matrix.of(rows, mode), bounds)
    if "K" in data and int(data["K"]) != M.K:
        raise ValueError(f"Заявлене K = {data['K']} не відповідає матриці {M.K}×{M.K}")
    return M


def load_matrix(path: str, mode: Optional[NumericMode] = None) -> GameMatrix:
    with open(path, encoding="utf-8") as f:
        return matrix_from_dict(json.load(f), mode)


def dump_matrix(M: GameMatrix, path: str):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(matrix_to_dict(M), f, ensure_ascii=False, indent=2)


# --- АЛФАВІТИ ---

def load_alphabet(path: str) -> Alphabet:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidAlphabetError(f"Некоректний JSON алфавіту: {e}")
    return Alphabet.from_dict(data)


def dump_alphabet(alphabet: Alphabet, path: str):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(alphabet.to_dict(), f)


# --- ПРОТОКОЛИ ---

def strategy_from_strings(values: list, mode: NumericMode) -> MixedStrategy:
    return MixedStrategy(Vector.of([parse_scalar(x, mode) for x in values], mode))


def record_to_dict(record: QueryRecord) -> dict:
    return {
        "t": record.t,
        "p": record.p.to_strings(),
        "q": record.q.to_strings(),
        "loss_p": record.loss_p.to_strings(),
        "loss_q": record.loss_q.to_strings(),
    }


def transcript_header(transcript: Transcript) -> dict:
    header = {
        "K": transcript.K,
        "mode": transcript.mode.value,
        "oracle_kind": transcript.oracle_kind,
        "T": transcript.T,
    }
    if transcript.recommendation is not None:
        p, q = transcript.recommendation
        header["recommendation"] = {"p": p.to_strings(), "q": q.to_strings()}
    return header


def transcript_lines(transcript: Transcript) -> list[str]:
    lines = [json.dumps(transcript_header(transcript), ensure_ascii=False)]
    lines.extend(json.dumps(record_to_dict(r)) for r in transcript.rounds)
    return lines


def parse_transcript(lines: Iterable[str]) -> Transcript:
    lines = [line for line in lines if line.strip()]
    if not lines:
        raise ValueError("Порожній файл протоколу")
    header = json.loads(lines[0])
    mode = NumericMode(header["mode"])
    rounds = []
    for line in lines[1:]:
        data = json.loads(line)
        rounds.append(QueryRecord(
            t=int(data["t"]),
            p=strategy_from_strings(data["p"], mode),
            q=strategy_from_strings(data["q"], mode),
            loss_p=Vector.of([parse_scalar(x, mode) for x in data["loss_p"]], mode),
            loss_q=Vector.of([parse_scalar(x, mode) for x in data["loss_q"]], mode),
        ))
    recommendation = None
    if "recommendation" in header:
        rec = header["recommendation"]
        recommendation = (strategy_from_strings(rec["p"], mode), strategy_from_strings(rec["q"], mode))
    return Transcript(K=int(header["K"]), mode=mode, oracle_kind=header["oracle_kind"],
                      rounds=tuple(rounds), recommendation=recommendation)


def write_transcript(transcript: Transcript, path: str):
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(transcript_lines(transcript)) + "\n")


def read_transcript(path: str) -> Transcript:
    with open(path, encoding="utf-8") as f:
        return parse_transcript(f.readlines())


# --- ТРАСИ СУПРОТИВНИКА ТА ЗАПИСИ ЗАПУСКІВ ---

def trace_row_to_dict(row) -> dict:
    return {
        "t": row.t,
        "u_norm_sq": format_scalar(row.u_norm_sq),
        "step_parameter": format_scalar(row.step_parameter),
        "potential": format_scalar(row.potential),
        "drift": format_scalar(row.drift),
        "decay": format_scalar(row.decay) if row.decay is not None else None,
    }


def write_jsonl(records: Iterable[dict], path: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    logger.info(f"Записано {count} рядків у {path}")


def write_json(data: dict, path: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
    logger.info(f"Записано {path}")
