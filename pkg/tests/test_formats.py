import json
from fractions import Fraction

import pytest

from numerics import NumericMode
from game_core import GameMatrix, MixedStrategy
from oracle import open_fixed_session
from adversary import new_exact_adversary, exact_respond
from recovery import Alphabet, InvalidAlphabetError
from formats import (
    dump_alphabet, dump_matrix, load_alphabet, load_matrix, matrix_from_dict, matrix_to_dict,
    read_transcript, trace_row_to_dict, transcript_header, write_json, write_jsonl, write_transcript,
)

M_EXAMPLE = GameMatrix.from_rows([[Fraction(1, 2), Fraction(-1, 2)], [Fraction(1, 4), 1]])


def test_matrix_document_layout():
    assert matrix_to_dict(M_EXAMPLE) == {
        "K": 2,
        "mode": "exact",
        "bounds": ["-1/1", "1/1"],
        "rows": [["1/2", "-1/2"], ["1/4", "1/1"]],
    }


def test_matrix_file_round_trip(tmp_path):
    path = str(tmp_path / "m.json")
    dump_matrix(M_EXAMPLE, path)
    assert load_matrix(path) == M_EXAMPLE
    assert load_matrix(path, NumericMode.FLOAT).entry(1, 0) == 0.25


def test_matrix_document_errors():
    with pytest.raises(ValueError):
        matrix_from_dict({"K": 3, "rows": [["0", "1"], ["1", "0"]]})
    with pytest.raises(ValueError):
        matrix_from_dict({"K": 2})


def test_alphabet_files(tmp_path):
    path = str(tmp_path / "a.json")
    alphabet = Alphabet.of([-2, 0, 1], 2)
    dump_alphabet(alphabet, path)
    assert load_alphabet(path) == alphabet
    broken = tmp_path / "broken.json"
    broken.write_text("{denominator", encoding="utf-8")
    with pytest.raises(InvalidAlphabetError):
        load_alphabet(str(broken))


def test_transcript_file(tmp_path):
    session = open_fixed_session(M_EXAMPLE)
    u = MixedStrategy.uniform(2)
    session.query(MixedStrategy.pure(2, 0), u)
    session.query(u, MixedStrategy.pure(2, 1))
    transcript = session.finalize(u, u)
    path = str(tmp_path / "t.jsonl")
    write_transcript(transcript, path)

    lines = open(path, encoding="utf-8").read().splitlines()
    assert len(lines) == 3
    header = json.loads(lines[0])
    assert header["oracle_kind"] == "fixed"
    assert header["T"] == 2
    assert json.loads(lines[1])["loss_q"] == ["-1/2", "1/2"]
    assert read_transcript(path) == transcript


def test_header_without_recommendation():
    state = new_exact_adversary(4)
    exact_respond(state, MixedStrategy.pure(4, 0), MixedStrategy.pure(4, 0))
    header = transcript_header(state.history)
    assert header["oracle_kind"] == "exact_adversary"
    assert "recommendation" not in header


def test_trace_rows_use_rational_strings():
    state = new_exact_adversary(4)
    exact_respond(state, MixedStrategy.pure(4, 0), MixedStrategy.pure(4, 0))
    row = trace_row_to_dict(state.trace[0])
    assert row["potential"] == "28/9"
    assert row["u_norm_sq"] == "1/32"
    assert row["step_parameter"] == "1/4"
    assert row["decay"] == "7/9"


def test_json_writers_create_directories(tmp_path):
    target = tmp_path / "nested" / "out"
    write_jsonl([{"a": 1}, {"a": 2}], str(target / "rows.jsonl"))
    write_json({"b": "x"}, str(target / "summary.json"))
    assert (target / "rows.jsonl").read_text(encoding="utf-8") == '{"a": 1}\n{"a": 2}\n'
    assert json.loads((target / "summary.json").read_text(encoding="utf-8")) == {"b": "x"}
