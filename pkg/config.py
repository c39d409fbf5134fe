# config.py

import logging
import os
from fractions import Fraction
from typing import Optional

from dotenv import load_dotenv, dotenv_values

from numerics import NumericMode

logger = logging.getLogger(__name__)

load_dotenv()

# Ключі файлу конфігурації експерименту (key=value)
CONFIG_KEYS = (
    "oracle.kind", "oracle.matrix", "oracle.T", "game.K", "mode",
    "learner.kind", "learner.T", "learner.eta", "learner.seed",
    "repetitions", "output.dir", "bounds.c",
)


class ConfigError(ValueError):
    pass


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name}: очікувалося ціле число, отримано {raw!r}")


def default_seed() -> int:
    return _env_int("MQL_SEED", 0)


def default_mode() -> NumericMode:
    raw = os.environ.get("MQL_MODE", NumericMode.EXACT.value)
    try:
        return NumericMode(raw)
    except ValueError:
        raise ConfigError(f"MQL_MODE: невідомий режим {raw!r}")


def default_upper_c() -> Fraction:
    raw = os.environ.get("MQL_UPPER_C", "8")
    try:
        value = Fraction(raw)
    except ValueError:
        raise ConfigError(f"MQL_UPPER_C: очікувалося число, отримано {raw!r}")
    if value <= 0:
        raise ConfigError(f"MQL_UPPER_C повинно бути додатним, отримано {raw!r}")
    return value


def default_output_dir() -> str:
    return os.environ.get("MQL_OUTPUT_DIR", "results")


def log_level() -> int:
    name = os.environ.get("MQL_LOG_LEVEL", "INFO").upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        raise ConfigError(f"MQL_LOG_LEVEL: невідомий рівень {name!r}")
    return level


def load_config_file(path: Optional[str]) -> dict:
    """Пласкі пари key=value; невідомі ключі дають ConfigError."""
    if not path:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"Файл конфігурації не знайдено: {path}")
    values = {k: v for k, v in dotenv_values(path).items() if v is not None}
    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"Невідомі ключі конфігурації: {', '.join(unknown)}")
    logger.info(f"Завантажено конфігурацію {path}: {len(values)} ключів")
    return values


def resolve(key: str, flag_value, file_values: dict, default):
    """Пріоритет: прапорець командного рядка > файл конфігурації > оточення/типове значення."""
    if flag_value is not None:
        return flag_value
    if key in file_values:
        return file_values[key]
    return default


def as_int(key: str, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: очікувалося ціле число, отримано {value!r}")


def as_fraction(key: str, value) -> Fraction:
    try:
        return Fraction(str(value))
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: очікувалося число, отримано {value!r}")


def as_mode(key: str, value) -> NumericMode:
    try:
        return NumericMode(value)
    except ValueError:
        raise ConfigError(f"{key}: невідомий режим {value!r}")


def grader_accounts() -> dict[str, str]:
    """
    Облікові записи оцінювачів HTTP-оракула.
    ORACLE_GRADERS = "ім'я:пароль,ім'я:пароль"; ORACLE_ADMIN_USER/ORACLE_ADMIN_PASS додають ще один запис.
    """
    accounts = {}
    for item in os.environ.get("ORACLE_GRADERS", "").split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, password = item.partition(":")
        if not sep or not name or not password:
            raise ConfigError(f"ORACLE_GRADERS: очікувалося ім'я:пароль, отримано {item!r}")
        accounts[name] = password
    admin_pass = os.environ.get("ORACLE_ADMIN_PASS")
    if admin_pass:
        accounts[os.environ.get("ORACLE_ADMIN_USER", "admin")] = admin_pass
    return accounts
