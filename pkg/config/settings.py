import os
from pathlib import Path

import dj_database_url

BASE_DIR = Path(__file__).resolve().parent.parent

# --- .env 자동 로드 (로컬용; 서버/CI에서는 환경변수로 주입) ---
try:
    from dotenv import load_dotenv  # pip install python-dotenv
    load_dotenv(BASE_DIR / ".env")
except Exception:
    pass


def env_bool(name: str, default: bool = False) -> bool:
    val = os.environ.get(name)
    if val is None:
        return default
    return val.strip().lower() in ("1", "true", "yes", "on")


def env_list(name: str, default=None):
    if default is None:
        default = []
    val = os.environ.get(name)
    if not val:
        return default
    return [x.strip() for x in val.split(",") if x.strip()]


def env_int(name: str, default: int) -> int:
    val = os.environ.get(name)
    if val is None or not val.strip():
        return default
    return int(val)


def env_float(name: str, default: float) -> float:
    val = os.environ.get(name)
    if val is None or not val.strip():
        return default
    return float(val)


# -------------------------
# Core
# -------------------------
DEBUG = env_bool("DEBUG", True)

SECRET_KEY = os.environ.get("SECRET_KEY", "dev-insecure-secret-key")

ALLOWED_HOSTS = env_list("ALLOWED_HOSTS", ["127.0.0.1", "localhost"])


# -------------------------
# Apps
# -------------------------
INSTALLED_APPS = [
    "apps.lab.apps.LabConfig",
]


# -------------------------
# Database (실험 ledger: ExperimentRun / ModelArtifact)
# -------------------------
DATABASES = {
    "default": dj_database_url.config(
        default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}",
        conn_max_age=600,
    )
}


# -------------------------
# I18N / TZ
# -------------------------
LANGUAGE_CODE = "ko-kr"
TIME_ZONE = "Asia/Seoul"
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# -------------------------
# windowlens 실험 기본값 (관리 명령 flag 기본값; WINDOWLENS_<KEY> env로 덮어쓰기)
# -------------------------
WINDOWLENS = {
    "VERSION": "1.0.0",
    "DIM": env_int("WINDOWLENS_DIM", 300),
    "NEGATIVES": env_int("WINDOWLENS_NEGATIVES", 5),
    "EPOCHS": env_int("WINDOWLENS_EPOCHS", 5),
    "LEARNING_RATE": env_float("WINDOWLENS_LEARNING_RATE", 0.05),
    "MIN_COUNT": env_int("WINDOWLENS_MIN_COUNT", 500),
    "SUBSAMPLE": env_float("WINDOWLENS_SUBSAMPLE", 1e-4),
    "K_SEARCH": env_int("WINDOWLENS_K_SEARCH", 100),
    "K_KEEP": env_int("WINDOWLENS_K_KEEP", 10),
    "JOBS": env_int("WINDOWLENS_JOBS", 1),
    "OUTPUT_DIR": os.environ.get("WINDOWLENS_OUTPUT_DIR", "runs"),
}


# -------------------------
# Logging: 라이브러리 진단은 stderr, 결과 요약은 관리 명령의 stdout
# -------------------------
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "stderr": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "apps.lab": {
            "handlers": ["stderr"],
            "level": os.environ.get("WINDOWLENS_LOG_LEVEL", "WARNING").upper(),
            "propagate": False,
        },
    },
}
