"""
Иерархия исключений симулятора.

Все ошибки, вызванные неверными аргументами, дополнительно наследуют ValueError,
поэтому вызывающий код может ловить их привычным способом.
"""


class SimulatorError(Exception):
    """Базовое исключение проекта."""


# ==========================================
# ПЛОТНОЕ ПРЕДСТАВЛЕНИЕ (statevec)
# ==========================================

class QubitLimitError(SimulatorError, ValueError):
    """Регистр превышает предел плотного бэкенда."""


class QubitIndexError(SimulatorError, ValueError):
    """Индекс кубита вне диапазона или совпадающие индексы."""


class NonUnitaryError(SimulatorError, ValueError):
    pass


class NormalizationError(SimulatorError, ValueError):
    """Нарушена нормировка состояния или смеси."""


class ZeroProbabilityError(SimulatorError, ValueError):
    """Запрошена ветвь измерения с нулевой вероятностью."""


class ZeroNormProjectionError(SimulatorError, ValueError):
    """Проекция чётности уничтожила состояние (нет нечётной компоненты)."""


# ==========================================
# ГРАФОВЫЙ РЕГИСТР
# ==========================================

class DeadVertexError(SimulatorError, ValueError):
    pass


class CliffordIndexError(SimulatorError, ValueError):
    pass


class FrozenRegisterError(SimulatorError):
    """Попытка изменить замороженный регистр."""


# ==========================================
# РОСТ И БРОКЕРЫ
# ==========================================

class BranchTipError(SimulatorError, ValueError):
    pass


class BrokerStateError(SimulatorError, ValueError):
    pass


# ==========================================
# MBQC
# ==========================================

class UnembeddableTargetError(SimulatorError, ValueError):
    pass


class PatternMismatchError(SimulatorError, ValueError):
    pass


# ==========================================
# CLI / СЦЕНАРИИ
# ==========================================

class ScenarioError(SimulatorError, ValueError):
    """Ошибка разбора сценария с указанием строки и поля."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"field '{field}': "
        super().__init__(prefix + message)
