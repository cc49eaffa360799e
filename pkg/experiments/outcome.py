import math
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict

from engine import statevec as sv

# Ширина статистической полосы для проверок Монте-Карло
SIGMA_BAND = 4.0


class ExperimentOutcome(BaseModel):
    """То, что обработчик эксперимента отдаёт сервису запусков."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    trial_payloads: list[dict[str, Any]] = []
    aggregate: dict[str, Any] = {}
    model_time_s: float = 0.0
    # строки для CSV: одна строка на шаг/испытание
    traces: list[dict[str, Any]] = []
    final_state: Optional[sv.PureState] = None


def z_score(observed: float, expected: float, stderr: float) -> float:
    """Отклонение в стандартных ошибках; нулевая ошибка - точное совпадение или бесконечность."""
    if stderr == 0:
        return 0.0 if observed == expected else math.inf
    return (observed - expected) / stderr


def within_band(observed: float, expected: float, stderr: float, band: float = SIGMA_BAND) -> bool:
    return abs(z_score(observed, expected, stderr)) <= band
