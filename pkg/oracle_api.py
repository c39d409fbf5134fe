# oracle_api.py

import logging

from fastapi import APIRouter, Body, Depends, FastAPI, HTTPException, status
from fastapi.responses import JSONResponse

from numerics import format_scalar
from game_core import MixedStrategy, gap
from oracle import Session, SessionClosedError, open_fixed_session
from adversary import AdversarySession, open_approx_session, open_exact_session, witness_search
from formats import matrix_from_dict, record_to_dict, strategy_from_strings, transcript_header
from dependencies import SessionRegistry, check_credentials, get_registry

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/oracle")


def _strategy(session: Session, data: dict, name: str) -> MixedStrategy:
    if name not in data:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=f"Відсутнє поле {name}")
    try:
        return strategy_from_strings(data[name], session.mode)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=f"{name}: {e}")


def _session_info(session_id: str, session: Session) -> dict:
    return {
        "session_id": session_id,
        "K": session.K,
        "mode": session.mode.value,
        "kind": session.kind,
        "bounds": [format_scalar(b) for b in session.bounds],
        "budget": session.budget,
        "queries_used": session.queries_used,
    }


@router.post("/sessions")
async def create_session(
    data: dict = Body(...),
    registry: SessionRegistry = Depends(get_registry),
    username: str = Depends(check_credentials),
):
    """Оцінювач реєструє приховану матрицю або відкриває сесію супротивника."""
    try:
        adversary = data.get("adversary")
        if adversary == "exact":
            session = open_exact_session(int(data["K"]))
        elif adversary == "approx":
            session = open_approx_session(int(data["K"]), int(data["T"]))
        elif adversary is None:
            budget = data.get("budget")
            session = open_fixed_session(matrix_from_dict(data["matrix"]), int(budget) if budget is not None else None)
        else:
            raise ValueError(f"Невідомий супротивник {adversary!r}")
    except KeyError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=f"Відсутнє поле {e}")
    except (ValueError, TypeError) as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    session_id = registry.add(session)
    logger.info(f"Оцінювач {username} відкрив сесію {session_id} ({session.kind}, K={session.K})")
    return JSONResponse(_session_info(session_id, session), status_code=status.HTTP_201_CREATED)


@router.get("/sessions/{session_id}")
async def session_info(session_id: str, registry: SessionRegistry = Depends(get_registry)):
    return _session_info(session_id, registry.get(session_id))


@router.post("/sessions/{session_id}/query")
def query_session(
    session_id: str,
    data: dict = Body(...),
    registry: SessionRegistry = Depends(get_registry),
):
    session = registry.get(session_id)
    p = _strategy(session, data, "p")
    q = _strategy(session, data, "q")
    try:
        record = session.query(p, q)
    except SessionClosedError as e:
        raise HTTPException(status_code=status.HTTP_409_CONFLICT, detail=str(e))
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    return record_to_dict(record)


@router.post("/sessions/{session_id}/finalize")
def finalize_session(
    session_id: str,
    data: dict = Body(...),
    registry: SessionRegistry = Depends(get_registry),
):
    session = registry.get(session_id)
    p = _strategy(session, data, "p")
    q = _strategy(session, data, "q")
    try:
        transcript = session.finalize(p, q)
    except SessionClosedError as e:
        raise HTTPException(status_code=status.HTTP_409_CONFLICT, detail=str(e))
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    return transcript_header(transcript)


@router.get("/sessions/{session_id}/transcript")
async def session_transcript(session_id: str, registry: SessionRegistry = Depends(get_registry)):
    session = registry.get(session_id)
    if session.transcript is None:
        header = {"K": session.K, "mode": session.mode.value, "oracle_kind": session.kind,
                  "T": session.queries_used}
    else:
        header = transcript_header(session.transcript)
    return {"header": header, "rounds": [record_to_dict(r) for r in session.rounds]}


@router.get("/sessions/{session_id}/grade")
def grade_session(
    session_id: str,
    registry: SessionRegistry = Depends(get_registry),
    username: str = Depends(check_credentials),
):
    """Розрив рекомендації: за прихованою матрицею або за свідком супротивника."""
    session = registry.get(session_id)
    if session.transcript is None:
        raise HTTPException(status_code=status.HTTP_409_CONFLICT, detail="Сесію ще не завершено")
    p, q = session.transcript.recommendation
    result = {"session_id": session_id, "queries_used": session.queries_used}
    if isinstance(session, AdversarySession):
        report = witness_search(session.state, p, q)
        value = report.gap
        result["witness_side"] = report.direction_kind.value
    else:
        value = gap(session.reveal(), p, q).gap
    result["gap"] = format_scalar(value)
    result["gap_decimal"] = float(value)
    logger.info(f"Оцінювач {username}: сесія {session_id}, розрив {result['gap']}")
    return result


@router.delete("/sessions/{session_id}")
def delete_session(
    session_id: str,
    registry: SessionRegistry = Depends(get_registry),
    username: str = Depends(check_credentials),
):
    """Оцінювач звільняє сесію після оцінювання."""
    session = registry.remove(session_id)
    logger.info(f"Оцінювач {username} видалив сесію {session_id} ({session.kind}, {session.queries_used} запитів)")
    return {"session_id": session_id, "deleted": True}


app = FastAPI(title="Matrix game first-order oracle")
app.include_router(router)
