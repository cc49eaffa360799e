"""
Рост графовых состояний из вероятностных геральдированных связей.

Две стратегии:
  * ветви: успех добавляет к кончику пару Белла (+2 вершины), неудача
    измеряет кончик в Z (-1 вершина); средний дрейф 3p - 1;
  * брокеры: оптически активный брокер принимает все неудачи, клиент
    получает ребро только после успеха.
"""
import logging
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from engine import clifford
from engine.graph_clifford import GraphRegister
from exceptions import BranchTipError, BrokerStateError

logger = logging.getLogger("growth")

PARITY_PHASES = (1j, -1j)


class LinkModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_success: float = Field(ge=0.0, le=1.0)
    attempt_time: float = Field(default=1.0, gt=0.0)


class TraceRow(BaseModel):
    """Строка трассы роста (CSV): время модели в наносекундах."""
    step: int
    attempts: int
    qubits: int
    edges: int
    model_time_ns: float


def trace_row(step: int, attempts: int, qubits: int, edges: int, attempt_time: float) -> TraceRow:
    return TraceRow(step=step, attempts=attempts, qubits=qubits, edges=edges,
                    model_time_ns=attempts * attempt_time * 1e9)


class GrowthStats(BaseModel):
    attempts: int = Field(ge=0)
    successes: int = Field(ge=0)
    qubits_in_state: list[int] = []
    trace: list[TraceRow] = []
    edges_created: int = Field(default=0, ge=0)
    model_time: float = Field(default=0.0, ge=0.0)
    initial_length: int = 0
    final_length: int = 0
    exhausted: bool = False

    @model_validator(mode="after")
    def check_counts(self):
        if self.successes > self.attempts:
            raise ValueError("successes cannot exceed attempts")
        return self

    @property
    def drift(self) -> float:
        if self.attempts == 0:
            return 0.0
        return (self.final_length - self.initial_length) / self.attempts


class BranchEnsemble(BaseModel):
    p_success: float
    steps: int
    trials: list[GrowthStats]
    mean_drift: float
    drift_stderr: float

    @property
    def expected_drift(self) -> float:
        return 3 * self.p_success - 1


class Branch(BaseModel):
    """Линейная ветвь графа; последний элемент - кончик."""
    vertices: list[int] = []

    @property
    def tip(self) -> int:
        if not self.vertices:
            raise BranchTipError("branch is exhausted")
        return self.vertices[-1]

    def __len__(self) -> int:
        return len(self.vertices)


class StepOutcome(BaseModel):
    success: bool
    phase: Optional[complex] = None
    delta: int


class BrokerNode(BaseModel):
    node_id: int
    broker: int
    client: int

    @model_validator(mode="after")
    def check_distinct(self):
        if self.broker == self.client:
            raise ValueError("broker and client must be different vertices")
        return self


class CorrectionRecord(BaseModel):
    """Локальные клиффорды и исходы, применённые при переносе ребра на клиентов."""
    cleared: dict[int, int] = {}
    outcomes: dict[int, int] = {}
    client_edge: tuple[int, int]


def edge_time(link: LinkModel) -> float:
    if link.p_success <= 0:
        raise ValueError("edge time is undefined for a link that never succeeds")
    return link.attempt_time / link.p_success


# ==========================================
# ВЕТВИ
# ==========================================

def new_branch(register: GraphRegister, length: int) -> Branch:
    """Линейный граф из length вершин."""
    branch = Branch()
    for _ in range(length):
        v = register.new_vertex()
        if branch.vertices:
            register.add_cz(branch.vertices[-1], v)
        branch.vertices.append(v)
    return branch


def branch_step(register: GraphRegister, branch: Branch, link: LinkModel, rng: np.random.Generator) -> StepOutcome:
    """
    Одна попытка удлинить ветвь на кончике.

    Успех: свежая пара n1-n2 проецируется по чётности (tip, n1), кончиком
    становится n2. Неудача: кончик измеряется в Z.
    """
    tip = branch.tip
    if tip not in register:
        raise BranchTipError(f"branch tip {tip} is not a live vertex")
    if rng.random() < link.p_success:
        phase = PARITY_PHASES[int(rng.integers(2))]
        first, second = register.new_vertex(), register.new_vertex()
        register.add_cz(first, second)
        register.parity_project(tip, first, np.conj(phase))
        branch.vertices += [first, second]
        return StepOutcome(success=True, phase=phase, delta=2)
    register.measure_pauli(tip, "Z", rng)
    branch.vertices.pop()
    return StepOutcome(success=False, delta=-1)


def grow_branch(
    register: GraphRegister,
    branch: Branch,
    link: LinkModel,
    steps: int,
    rng: np.random.Generator,
) -> GrowthStats:
    """Физический рост ветви на регистре (для небольших прогонов)."""
    initial = len(branch)
    attempts = successes = 0
    trace = [initial]
    rows = [trace_row(0, 0, len(register), len(register.edges), link.attempt_time)]
    for _ in range(steps):
        if not branch.vertices:
            break
        outcome = branch_step(register, branch, link, rng)
        attempts += 1
        successes += outcome.success
        trace.append(len(branch))
        rows.append(trace_row(attempts, attempts, len(register), len(register.edges), link.attempt_time))
    return GrowthStats(
        attempts=attempts,
        successes=successes,
        qubits_in_state=trace,
        trace=rows,
        edges_created=successes,
        model_time=attempts * link.attempt_time,
        initial_length=initial,
        final_length=len(branch),
        exhausted=not branch.vertices,
    )


def simulate_branch_growth(
    p: float,
    steps: int,
    trials: int,
    rng: np.random.Generator,
    initial_length: Optional[int] = None,
    attempt_time: float = 1.0,
    keep_trace: bool = False,
) -> BranchEnsemble:
    """
    Монте-Карло длины ветви: +2 с вероятностью p, иначе -1.

    Без initial_length ветвь начинается с длины steps и не может исчерпаться.
    Исчерпанная ветвь (длина 0) перестаёт расти.
    """
    if steps < 1 or trials < 1:
        raise ValueError("steps and trials must be positive")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"success probability must lie in [0, 1], got {p}")
    start = steps if initial_length is None else initial_length
    if start < 1:
        raise ValueError("initial branch length must be positive")

    wins = rng.random((trials, steps)) < p
    lengths = start + np.cumsum(np.where(wins, 2, -1), axis=1)
    dead = lengths <= 0
    exhausted = dead.any(axis=1)
    # число сделанных попыток: до первого исчерпания включительно
    attempts = np.where(exhausted, dead.argmax(axis=1) + 1, steps)

    stats = []
    for t in range(trials):
        used = int(attempts[t])
        trace = [start] + lengths[t, :used].tolist() if keep_trace else []
        # ветвь - цепочка: рёбер на одно меньше, чем вершин
        rows = [trace_row(i, i, q, max(q - 1, 0), attempt_time) for i, q in enumerate(trace)]
        successes = int(wins[t, :used].sum())
        stats.append(GrowthStats(
            attempts=used,
            successes=successes,
            qubits_in_state=trace,
            trace=rows,
            edges_created=successes,
            model_time=used * attempt_time,
            initial_length=start,
            final_length=int(lengths[t, used - 1]),
            exhausted=bool(exhausted[t]),
        ))
    drifts = np.array([s.drift for s in stats])
    stderr = float(drifts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    logger.debug("branch ensemble p=%.4f: mean drift %.5f +- %.5f", p, drifts.mean(), stderr)
    return BranchEnsemble(
        p_success=p,
        steps=steps,
        trials=stats,
        mean_drift=float(drifts.mean()),
        drift_stderr=stderr,
    )


# ==========================================
# БРОКЕРЫ
# ==========================================

def new_broker_node(register: GraphRegister, node_id: int) -> BrokerNode:
    client = register.new_vertex()
    broker = register.new_vertex()
    return BrokerNode(node_id=node_id, broker=broker, client=client)


def _check_fresh_broker(register: GraphRegister, node: BrokerNode) -> None:
    if node.broker not in register or node.client not in register:
        raise BrokerStateError(f"node {node.node_id} has a dead qubit")
    if register.neighbors(node.broker) or register.vertex_ops[node.broker] != clifford.IDENTITY:
        raise BrokerStateError(f"broker of node {node.node_id} is not a fresh |+> qubit")


def _reset_broker(register: GraphRegister, node: BrokerNode, rng: np.random.Generator) -> None:
    register.measure_pauli(node.broker, "Z", rng)
    node.broker = register.new_vertex()


def broker_bell(
    a: BrokerNode,
    b: BrokerNode,
    link: LinkModel,
    register: GraphRegister,
    rng: np.random.Generator,
    max_attempts: Optional[int] = None,
) -> Optional[int]:
    """
    Повторяет попытки между брокерами до успеха; возвращает число попыток.

    После неудачи оба брокера сбрасываются в |+>, клиенты не затрагиваются.
    С max_attempts возвращает None, если лимит исчерпан.
    """
    _check_fresh_broker(register, a)
    _check_fresh_broker(register, b)
    attempts = 0
    while max_attempts is None or attempts < max_attempts:
        attempts += 1
        if rng.random() < link.p_success:
            phase = PARITY_PHASES[int(rng.integers(2))]
            register.parity_project(a.broker, b.broker, np.conj(phase))
            logger.debug("brokers %d-%d entangled after %d attempts", a.node_id, b.node_id, attempts)
            return attempts
        _reset_broker(register, a, rng)
        _reset_broker(register, b, rng)
    return None


def _clear(register: GraphRegister, v: int, record: CorrectionRecord) -> None:
    c = register.vertex_ops[v]
    if c != clifford.IDENTITY:
        register.apply_local_clifford(v, clifford.inverse(c))
        record.cleared[v] = record.cleared.get(v, clifford.IDENTITY)
        record.cleared[v] = clifford.multiply(clifford.inverse(c), record.cleared[v])


def broker_to_client_edge(
    a: BrokerNode,
    b: BrokerNode,
    register: GraphRegister,
    rng: np.random.Generator,
) -> CorrectionRecord:
    """
    Переносит запутанность брокеров на клиентов: CZ брокер-клиент,
    затем измерения брокеров в Y. Ребро между клиентами инвертируется
    (уже существующее ребро исчезнет). После этого у узлов новые брокеры.
    """
    for node in (a, b):
        if node.broker not in register or node.client not in register:
            raise BrokerStateError(f"node {node.node_id} has a dead qubit")
    if set(register.neighbors(a.broker)) != {b.broker} or set(register.neighbors(b.broker)) != {a.broker}:
        raise BrokerStateError(f"brokers of nodes {a.node_id} and {b.node_id} do not hold an isolated pair")

    record = CorrectionRecord(client_edge=tuple(sorted((a.client, b.client))))
    for v in (a.broker, b.broker, a.client, b.client):
        _clear(register, v, record)
    register.add_cz(a.broker, a.client)
    register.add_cz(b.broker, b.client)
    record.outcomes[a.broker] = register.measure_pauli(a.broker, "Y", rng)
    _clear(register, b.broker, record)
    record.outcomes[b.broker] = register.measure_pauli(b.broker, "Y", rng)
    a.broker = register.new_vertex()
    b.broker = register.new_vertex()
    return record


def grow_brokered_graph(
    register: GraphRegister,
    nodes: list[BrokerNode],
    edges: list[tuple[int, int]],
    link: LinkModel,
    rng: np.random.Generator,
) -> GrowthStats:
    """Строит заданные рёбра между клиентами узлов; узлы адресуются по node_id."""
    by_id = {node.node_id: node for node in nodes}
    attempts = 0
    qubits = [len(register)]
    rows = [trace_row(0, 0, len(register), len(register.edges), link.attempt_time)]
    for i, j in edges:
        if i not in by_id or j not in by_id:
            raise BrokerStateError(f"edge {i}-{j} references an unknown node")
        attempts += broker_bell(by_id[i], by_id[j], link, register, rng)
        broker_to_client_edge(by_id[i], by_id[j], register, rng)
        qubits.append(len(register))
        rows.append(trace_row(len(rows), attempts, len(register), len(register.edges), link.attempt_time))
    return GrowthStats(
        attempts=attempts,
        successes=len(edges),
        qubits_in_state=qubits,
        trace=rows,
        edges_created=len(edges),
        model_time=attempts * link.attempt_time,
    )
