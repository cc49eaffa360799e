from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from engine.budget import CavityParams, LinkBudget, SpinTimes
from engine.erasure import ApparatusParams, Scheme, success_rate_model
from engine.growth import LinkModel

# ==========================================
# СЦЕНАРИЙ
# ==========================================

class Experiment(str, Enum):
    ENTANGLE = "entangle"
    GROW = "grow"
    RUN_PATTERN = "run-pattern"
    PRUNE = "prune"
    BUDGET = "budget"
    VERIFY = "verify"


VERIFY_SUITES = ("graph", "pattern", "growth", "erasure")


class Strategy(str, Enum):
    BRANCH = "branch"
    BROKER = "broker"


class Scenario(BaseModel):
    """
    Плоское описание эксперимента, как оно записано в файле сценария.
    Аппаратные блоки собираются свойствами apparatus/link/spin/cavity.
    """
    model_config = ConfigDict(extra="forbid")

    experiment: Experiment
    # BigInteger хранилища - знаковые 64 бита
    seed: int = Field(default=0, ge=0, lt=2 ** 63)
    trials: int = Field(default=1, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)
    preset: Optional[str] = None

    # --- Оптика ---
    scheme: Scheme = Scheme.IDEAL
    eta: float = Field(default=1.0, ge=0.0, le=1.0)
    dark_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    epsilon: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    number_resolving: bool = True

    # --- Связь и рост ---
    attempt_time: float = Field(default=1.0, gt=0.0)
    p_success: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    strategy: Strategy = Strategy.BRANCH
    steps: int = Field(default=100, ge=1)
    initial_length: Optional[int] = Field(default=None, ge=1)
    physical: bool = False
    broker_nodes: int = Field(default=2, ge=2)

    # --- Файлы ---
    target: Optional[Path] = None
    circuit: Optional[Path] = None
    pattern: Optional[Path] = None
    rows: int = Field(default=2, ge=1)
    cols: int = Field(default=2, ge=1)

    # --- Бюджет ---
    t1: Optional[float] = Field(default=None, gt=0.0)
    t2_pdp: float = Field(default=float("inf"), gt=0.0)
    client_t2: float = Field(default=1.0, gt=0.0)
    fault_budget: float = Field(default=0.01, gt=0.0, le=1.0)
    q_factor: Optional[float] = Field(default=None, gt=0.0)
    mode_volume: float = Field(default=1.0, gt=0.0)
    refractive_index: float = Field(default=1.0, gt=0.0)

    # --- Проверка ---
    suite: str = "all"
    inject_failure: bool = False

    @field_validator("target", "circuit", "pattern")
    @classmethod
    def file_must_exist(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.is_file():
            raise ValueError(f"file {value} does not exist")
        return value

    @field_validator("suite")
    @classmethod
    def known_suites(cls, value: str) -> str:
        names = [part.strip().lower() for part in value.split(",") if part.strip()]
        unknown = [n for n in names if n != "all" and n not in VERIFY_SUITES]
        if not names or unknown:
            raise ValueError(f"suite must be 'all' or a comma list of {list(VERIFY_SUITES)}")
        return ",".join(names)

    @model_validator(mode="after")
    def check_scheme(self):
        if self.scheme == Scheme.WEAK and self.epsilon is None:
            raise ValueError("weak-excitation scheme needs epsilon")
        return self

    @property
    def apparatus(self) -> ApparatusParams:
        return ApparatusParams(
            eta=self.eta,
            dark_prob=self.dark_prob,
            scheme=self.scheme,
            epsilon=self.epsilon,
            number_resolving=self.number_resolving,
        )

    @property
    def link(self) -> LinkModel:
        """Явная p_success важнее оценки по оптике."""
        p = self.p_success if self.p_success is not None else success_rate_model(self.scheme, self.eta)
        return LinkModel(p_success=p, attempt_time=self.attempt_time)

    @property
    def spin(self) -> Optional[SpinTimes]:
        if self.t1 is None:
            return None
        return SpinTimes(t1=self.t1, t2_pdp=self.t2_pdp)

    @property
    def cavity(self) -> Optional[CavityParams]:
        if self.q_factor is None:
            return None
        return CavityParams(
            q_factor=self.q_factor,
            mode_volume=self.mode_volume,
            refractive_index=self.refractive_index,
        )


# ==========================================
# ЗАПИСИ ЗАПУСКОВ
# ==========================================

class TrialResultCreate(BaseModel):
    trial_index: int = Field(ge=0)
    payload: Dict[str, Any]


class TrialResultResponse(TrialResultCreate):
    id: int

    model_config = ConfigDict(from_attributes=True)


class RunRecordCreate(BaseModel):
    """Результат одного запуска; при одинаковых сценарии и seed совпадает побитно (кроме wall_clock_s)."""
    experiment: Experiment
    scenario_digest: str = Field(min_length=64, max_length=64)
    seed: int
    trials: int = Field(ge=1)
    model_time_s: float = 0.0
    wall_clock_s: float = 0.0
    aggregate: Dict[str, Any] = {}
    trial_results: List[TrialResultCreate] = []

    @computed_field
    @property
    def passed(self) -> Optional[bool]:
        return self.aggregate.get("passed")


class RunRecordResponse(BaseModel):
    id: int
    experiment: Experiment
    scenario_digest: str
    seed: int
    trials: int
    model_time_s: float
    wall_clock_s: float
    aggregate: Dict[str, Any]
    created_at: Optional[datetime] = None

    model_config = ConfigDict(from_attributes=True)


class RunRecordDetail(RunRecordResponse):
    trial_results: List[TrialResultResponse] = []


class BudgetReport(BaseModel):
    link: LinkBudget
    spin: Optional[SpinTimes] = None
    purcell_factor: Optional[float] = None
