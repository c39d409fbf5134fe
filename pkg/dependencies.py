# dependencies.py
import secrets
import logging
import threading
import uuid
from fastapi import Depends, HTTPException, status
from fastapi.security import HTTPBasic, HTTPBasicCredentials

from config import ConfigError, grader_accounts
from oracle import Session

logger = logging.getLogger(__name__)

security = HTTPBasic()


def check_credentials(credentials: HTTPBasicCredentials = Depends(security)) -> str:
    """Повертає ім'я оцінювача, якщо пара логін/пароль є в ростері."""
    try:
        accounts = grader_accounts()
    except ConfigError as e:
        logger.error(f"Некоректний ростер оцінювачів: {e}")
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(e))

    if not accounts:
        logger.error("КРИТИЧНА ПОМИЛКА: не задано жодного оцінювача (ORACLE_GRADERS або ORACLE_ADMIN_PASS)")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Система не налаштована (немає облікових записів оцінювачів)",
        )

    # перебираємо всі записи, щоб час відповіді не залежав від позиції збігу
    matched = None
    for name, password in accounts.items():
        is_user_ok = secrets.compare_digest(credentials.username.encode(), name.encode())
        is_pass_ok = secrets.compare_digest(credentials.password.encode(), password.encode())
        if is_user_ok and is_pass_ok:
            matched = name

    if matched is None:
        logger.warning(f"Відхилено вхід оцінювача {credentials.username!r}")
        raise HTTPException(
            status_code=status.HTTP_401_UNAUTHORIZED,
            detail="Неправильний логін або пароль",
            headers={"WWW-Authenticate": "Basic"},
        )
    return matched


class SessionRegistry:
    """Сесії оракула за ідентифікатором; кожна сесія має один власник."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)

    def add(self, session: Session) -> str:
        session_id = uuid.uuid4().hex
        with self._lock:
            self._sessions[session_id] = session
        return session_id

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail="Сесію не знайдено")
        return session

    def remove(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.pop(session_id, None)
        if session is None:
            raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail="Сесію не знайдено")
        return session

    def clear(self):
        with self._lock:
            self._sessions.clear()


registry = SessionRegistry()


def get_registry() -> SessionRegistry:
    """Надає реєстр сесій для ендпоінта."""
    return registry
