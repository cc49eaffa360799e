"""
Аналитические оценки оборудования: фактор Парселла, сложение T2, бюджет связи.
"""
import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from engine.erasure import Scheme, success_rate_model
from engine.growth import LinkModel, edge_time

# Доля декогеренции на ребро, "процент или меньше"
DEFAULT_FAULT_BUDGET = 0.01

# Округление, с которым опубликован бюджет квантовых точек
QD_ROUNDING_NOTE = 'exact quotient is 8 ns; published budget rounds this to "just 10 ns"'


class CavityParams(BaseModel):
    """V задаётся в единицах lambda^3, поэтому длина волны сокращается."""
    model_config = ConfigDict(frozen=True)

    q_factor: float = Field(gt=0)
    mode_volume: float = Field(default=1.0, gt=0)
    refractive_index: float = Field(gt=0)


class SpinTimes(BaseModel):
    model_config = ConfigDict(frozen=True)

    t1: float = Field(gt=0)
    t2_pdp: float = Field(default=math.inf, gt=0)

    @computed_field
    @property
    def t2(self) -> float:
        return t2_compose(self.t1, self.t2_pdp)


class LinkBudget(BaseModel):
    model_config = ConfigDict(frozen=True)

    attempt_time: float = Field(gt=0)
    eta: float = Field(ge=0, le=1)
    scheme: Scheme
    client_t2: float = Field(gt=0)
    fault_budget: float = Field(default=DEFAULT_FAULT_BUDGET, gt=0, le=1)
    p_success: float
    edge_time: float
    note: Optional[str] = None

    @model_validator(mode="after")
    def check_edge_time(self):
        if not math.isclose(self.edge_time, self.attempt_time / self.p_success, rel_tol=1e-12):
            raise ValueError("edge_time must equal attempt_time / p_success")
        return self

    @computed_field
    @property
    def edges_per_coherence(self) -> float:
        return self.client_t2 / self.edge_time

    @computed_field
    @property
    def decoherence_per_edge(self) -> float:
        return self.edge_time / self.client_t2

    @computed_field
    @property
    def within_fault_budget(self) -> bool:
        return self.decoherence_per_edge < self.fault_budget


def purcell(c: CavityParams) -> float:
    """F_P = 3Q / (4 pi^2 n^3 V), V в единицах lambda^3."""
    return 3 * c.q_factor / (4 * math.pi ** 2 * c.refractive_index ** 3 * c.mode_volume)


def t2_compose(t1: float, t2_pdp: float = math.inf) -> float:
    """1/T2 = 1/(2 T1) + 1/T2_pdp; бесконечные времена допустимы."""
    if t1 <= 0 or t2_pdp <= 0:
        raise ValueError("coherence times must be positive")
    rate = 1 / (2 * t1) + 1 / t2_pdp
    return 1 / rate


def link_budget(
    attempt_time: float,
    eta: float,
    scheme: Scheme | str,
    client_t2: float,
    fault_budget: float = DEFAULT_FAULT_BUDGET,
    note: Optional[str] = None,
) -> LinkBudget:
    scheme = Scheme(scheme)
    p = success_rate_model(scheme, eta)
    if p <= 0:
        raise ValueError("link with zero success probability never produces an edge")
    link = LinkModel(p_success=p, attempt_time=attempt_time)
    return LinkBudget(
        attempt_time=attempt_time,
        eta=eta,
        scheme=scheme,
        client_t2=client_t2,
        fault_budget=fault_budget,
        p_success=p,
        edge_time=edge_time(link),
        note=note,
    )
