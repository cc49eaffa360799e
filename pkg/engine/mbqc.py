"""
Компиляция схем в графовые состояния с адаптивными измерениями и их
исполнение на плотном бэкенде.

Один "прыжок" по линейному графу с измерением под углом phi реализует
J(phi) = H * Uz(-phi); исход 1 добавляет побочный X. Побочные операторы
распространяются по потоку (flow): X на следующую вершину провода,
Z на её соседей. Угол измерения меняет знак при установленном X-бите,
исход инвертируется при установленном Z-бите.
"""
import itertools
import logging
import math
from enum import Enum
from typing import Literal, Optional, Sequence, Union

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from engine import statevec as sv
from engine.graph_clifford import GraphRegister, to_dense
from exceptions import PatternMismatchError, QubitLimitError, UnembeddableTargetError, ZeroProbabilityError

logger = logging.getLogger("mbqc_runner")

MAX_WIRES = 4
MAX_PATTERN_QUBITS = 20

# J(-pi/2)^3 пропорционально I: заполнение нечётных разрывов
ODD_PADDING = (-math.pi / 2,) * 3
EVEN_PADDING = (0.0, 0.0)


# ==========================================
# СХЕМЫ
# ==========================================

class GateKind(str, Enum):
    RZ = "rz"
    H = "h"
    CZ = "cz"


class Gate(BaseModel):
    kind: GateKind
    wires: tuple[int, ...]
    angle: float = 0.0

    @model_validator(mode="after")
    def check_arity(self):
        expected = 2 if self.kind == GateKind.CZ else 1
        if len(self.wires) != expected:
            raise ValueError(f"gate {self.kind.value} acts on {expected} wire(s)")
        if len(set(self.wires)) != len(self.wires):
            raise ValueError("cz needs two distinct wires")
        if not math.isfinite(self.angle):
            raise ValueError("gate angle must be finite")
        return self


class CircuitSpec(BaseModel):
    width: int = Field(ge=1)
    gates: list[Gate] = []

    @model_validator(mode="after")
    def check_wires(self):
        for gate in self.gates:
            if any(w >= self.width or w < 0 for w in gate.wires):
                raise ValueError(f"gate {gate.kind.value} uses a wire outside 0..{self.width - 1}")
        return self


def rz_matrix(theta: float) -> np.ndarray:
    """Rz(theta) = diag(1, e^{i theta})."""
    return sv.uz(theta)


def hop_matrix(phi: float) -> np.ndarray:
    return sv.H @ sv.uz(-phi)


def simulate_circuit(circuit: CircuitSpec, inputs: Sequence[sv.PureState]) -> sv.PureState:
    """Прямое моделирование схемы; провод w - кубит w."""
    if len(inputs) != circuit.width:
        raise PatternMismatchError(f"circuit has {circuit.width} wires, got {len(inputs)} inputs")
    state = sv.kron_states(*reversed(list(inputs)))
    for gate in circuit.gates:
        if gate.kind == GateKind.CZ:
            state = sv.apply_cz(state, *gate.wires)
        elif gate.kind == GateKind.H:
            state = sv.apply_1q(state, gate.wires[0], sv.H)
        else:
            state = sv.apply_1q(state, gate.wires[0], rz_matrix(gate.angle))
    return state


# ==========================================
# ШАБЛОНЫ ИЗМЕРЕНИЙ
# ==========================================

Basis = Union[Literal["X", "Y", "Z"], float]


class MeasurementCommand(BaseModel):
    vertex: int
    basis: Basis
    adapt: list[int] = []
    flip: list[int] = []

    @field_validator("basis", mode="before")
    @classmethod
    def parse_basis(cls, value):
        if isinstance(value, dict):
            if set(value) != {"xy"}:
                raise ValueError('basis object must be {"xy": angle}')
            return float(value["xy"])
        return value

    @field_serializer("basis")
    def serialize_basis(self, basis):
        return basis if isinstance(basis, str) else {"xy": basis}


class OutputCorrection(BaseModel):
    x: list[int] = []
    z: list[int] = []


class Blueprint(BaseModel):
    vertices: list[int]
    edges: list[tuple[int, int]]
    inputs: list[int]
    outputs: list[int]

    @model_validator(mode="after")
    def check_graph(self):
        known = set(self.vertices)
        for a, b in self.edges:
            if a == b or a not in known or b not in known:
                raise ValueError(f"invalid edge {a}-{b}")
        if not set(self.inputs) <= known or not set(self.outputs) <= known:
            raise ValueError("inputs and outputs must be blueprint vertices")
        return self

    def neighbors(self) -> dict[int, set[int]]:
        table = {v: set() for v in self.vertices}
        for a, b in self.edges:
            table[a].add(b)
            table[b].add(a)
        return table

    def to_register(self) -> GraphRegister:
        """Графовый регистр с теми же номерами вершин (входы в |+>)."""
        register = GraphRegister()
        for expected in sorted(self.vertices):
            v = register.new_vertex()
            if v != expected:
                raise PatternMismatchError("blueprint vertices must be numbered 0..N-1")
        for a, b in self.edges:
            register.add_cz(a, b)
        return register


class MeasurementPattern(BaseModel):
    blueprint: Blueprint
    commands: list[MeasurementCommand]
    output_corrections: dict[int, OutputCorrection] = {}

    @model_validator(mode="after")
    def check_commands(self):
        measured = [c.vertex for c in self.commands]
        expected = set(self.blueprint.vertices) - set(self.blueprint.outputs)
        if len(measured) != len(set(measured)) or set(measured) != expected:
            raise ValueError("every non-output vertex must be measured exactly once")
        for position, command in enumerate(self.commands):
            if any(not 0 <= d < position for d in command.adapt + command.flip):
                raise ValueError(f"command {position} depends on a later measurement")
        for correction in self.output_corrections.values():
            if any(not 0 <= d < len(self.commands) for d in correction.x + correction.z):
                raise ValueError("output correction references an unknown measurement")
        return self

    @property
    def inputs(self) -> list[int]:
        return self.blueprint.inputs

    @property
    def outputs(self) -> list[int]:
        return self.blueprint.outputs


class PauliFrame(BaseModel):
    """Биты (x, z) на каждом выходном проводе."""
    bits: list[tuple[int, int]]


class PatternResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    outputs: sv.PureState
    frame: PauliFrame
    outcomes: list[int]


class HopResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    outcome: int
    post_state: sv.PureState
    x_flip: int


class PatternBuilder:
    """
    Сборка шаблона по проводам: прыжки, тождественные вставки, мосты CZ.

    Вершины нумеруются в порядке создания; мост соединяет концы проводов
    в одном столбце, поэтому порядок измерений по столбцам корректен.
    """

    def __init__(self, width: int):
        self.width = width
        self._count = 0
        self.position: dict[int, tuple[int, int]] = {}
        self.tails = [self._new_vertex(w, 0) for w in range(width)]
        self.inputs = list(self.tails)
        self.edges: set[tuple[int, int]] = set()
        self.flow: dict[int, int] = {}
        self.angles: dict[int, Basis] = {}

    def _new_vertex(self, wire: int, column: int) -> int:
        v = self._count
        self._count += 1
        self.position[v] = (wire, column)
        return v

    def _toggle(self, a: int, b: int) -> None:
        edge = (min(a, b), max(a, b))
        self.edges ^= {edge}

    def column(self, wire: int) -> int:
        return self.position[self.tails[wire]][1]

    def hop(self, wire: int, angle: float) -> None:
        v = self.tails[wire]
        w = self._new_vertex(wire, self.column(wire) + 1)
        self._toggle(v, w)
        self.flow[v] = w
        self.angles[v] = float(angle)
        self.tails[wire] = w

    def hops(self, wire: int, angles: Sequence[float]) -> None:
        for angle in angles:
            self.hop(wire, angle)

    def pad(self, wire: int, length: int) -> None:
        """Вставка тождества длины length (любая, кроме 1)."""
        if length == 1 or length < 0:
            raise ValueError("identity padding needs 0 or at least 2 hops")
        if length % 2:
            self.hops(wire, ODD_PADDING)
            length -= 3
        for _ in range(length // 2):
            self.hops(wire, EVEN_PADDING)

    def bridge(self, a: int, b: int) -> None:
        lead, lag = (a, b) if self.column(a) >= self.column(b) else (b, a)
        gap = self.column(lead) - self.column(lag)
        if gap == 1:
            self.pad(lead, 2)
            self.pad(lag, 3)
        elif gap:
            self.pad(lag, gap)
        self._toggle(self.tails[a], self.tails[b])

    def build(self) -> MeasurementPattern:
        outputs = list(self.tails)
        neighbours: dict[int, set[int]] = {v: set() for v in self.position}
        for a, b in self.edges:
            neighbours[a].add(b)
            neighbours[b].add(a)
        order = sorted(self.flow, key=lambda v: (self.position[v][1], self.position[v][0]))
        x_deps: dict[int, set[int]] = {v: set() for v in self.position}
        z_deps: dict[int, set[int]] = {v: set() for v in self.position}
        commands = []
        for index, v in enumerate(order):
            commands.append(MeasurementCommand(
                vertex=v,
                basis=self.angles[v],
                adapt=sorted(x_deps[v]),
                flip=sorted(z_deps[v]),
            ))
            # исход в outcomes уже исправлен по flip, сигнал - только он сам
            signal = {index}
            successor = self.flow[v]
            x_deps[successor] ^= signal
            for w in neighbours[successor] - {v}:
                z_deps[w] ^= signal
        blueprint = Blueprint(
            vertices=sorted(self.position),
            edges=sorted(self.edges),
            inputs=self.inputs,
            outputs=outputs,
        )
        corrections = {
            o: OutputCorrection(x=sorted(x_deps[o]), z=sorted(z_deps[o])) for o in outputs
        }
        return MeasurementPattern(blueprint=blueprint, commands=commands, output_corrections=corrections)


def compile_rotation(phi1: float, phi2: float, phi3: float) -> MeasurementPattern:
    """Линейный граф из 4 вершин: J(phi3) J(phi2) J(phi1)."""
    builder = PatternBuilder(1)
    builder.hops(0, (phi1, phi2, phi3))
    return builder.build()


def rotation_unitary(phi1: float, phi2: float, phi3: float) -> np.ndarray:
    return hop_matrix(phi3) @ hop_matrix(phi2) @ hop_matrix(phi1)


def _gate_hops(gate: Gate) -> tuple[float, float, float]:
    if gate.kind == GateKind.H:
        return (0.0, 0.0, 0.0)
    # J(-pi/2) J(-pi/2) J(-pi/2 - theta) ~ Uz(theta)
    return (-math.pi / 2 - gate.angle, -math.pi / 2, -math.pi / 2)


def compile_circuit(c: CircuitSpec, max_qubits: int = MAX_PATTERN_QUBITS) -> tuple[Blueprint, MeasurementPattern]:
    """
    Каждый однокубитный вентиль занимает три прыжка, CZ - мост между
    концами проводов, выровненными тождественными вставками.
    """
    if c.width > MAX_WIRES:
        raise QubitLimitError(f"circuits are limited to {MAX_WIRES} wires")
    builder = PatternBuilder(c.width)
    for gate in c.gates:
        if gate.kind == GateKind.CZ:
            builder.bridge(*gate.wires)
        else:
            builder.hops(gate.wires[0], _gate_hops(gate))
    pattern = builder.build()
    if len(pattern.blueprint.vertices) > max_qubits:
        raise QubitLimitError(
            f"compiled pattern needs {len(pattern.blueprint.vertices)} qubits, limit is {max_qubits}"
        )
    return pattern.blueprint, pattern


def bridge_pattern() -> tuple[MeasurementPattern, CircuitSpec]:
    """
    Две линейные цепочки по три вершины, соединённые мостом в середине.
    Эквивалентная схема: (H x H) CZ (H x H).
    """
    builder = PatternBuilder(2)
    builder.hop(0, 0.0)
    builder.hop(1, 0.0)
    builder.bridge(0, 1)
    builder.hop(0, 0.0)
    builder.hop(1, 0.0)
    circuit = CircuitSpec(width=2, gates=[
        Gate(kind=GateKind.H, wires=(0,)), Gate(kind=GateKind.H, wires=(1,)),
        Gate(kind=GateKind.CZ, wires=(0, 1)),
        Gate(kind=GateKind.H, wires=(0,)), Gate(kind=GateKind.H, wires=(1,)),
    ])
    return builder.build(), circuit


# ==========================================
# ИСПОЛНЕНИЕ
# ==========================================

def hop_step(state: sv.PureState, phi: float, rng: np.random.Generator, outcome: Optional[int] = None) -> HopResult:
    """
    Запутывает однокубитное состояние со свежим |+> и измеряет исходный кубит.
    Исход 0: H Uz(-phi)|psi>; исход 1: X H Uz(-phi)|psi>.
    """
    if state.num_qubits != 1:
        raise PatternMismatchError("hop_step acts on a single-qubit state")
    joint = sv.apply_cz(sv.kron_states(state, sv.init_plus(1)), 0, 1)
    result = sv.measure_basis(joint, 1, phi, rng, outcome=outcome)
    return HopResult(outcome=result.label, post_state=result.post_state, x_flip=result.label)


def _parity(outcomes: Sequence[int], deps: Sequence[int]) -> int:
    return sum(outcomes[d] for d in deps) % 2


class _LiveRegister:
    """Плотный регистр, в который вершины добавляются по мере надобности."""

    def __init__(self, neighbours: dict[int, set[int]], initial: dict[int, sv.PureState]):
        self.state = sv.scalar_state()
        self.live: list[int] = []
        self.done_edges: set[tuple[int, int]] = set()
        self.neighbours = neighbours
        self.initial = initial

    def ensure(self, v: int) -> None:
        if v not in self.live:
            self.state = sv.append_qubit(self.state, self.initial.get(v))
            self.live.append(v)

    def entangle(self, v: int) -> None:
        self.ensure(v)
        for w in sorted(self.neighbours[v]):
            edge = (min(v, w), max(v, w))
            if edge in self.done_edges:
                continue
            self.ensure(w)
            self.state = sv.apply_cz(self.state, self.live.index(v), self.live.index(w))
            self.done_edges.add(edge)

    def measure(self, v: int, basis, rng, outcome: Optional[int]) -> int:
        result = sv.measure_basis(self.state, self.live.index(v), basis, rng, outcome=outcome)
        self.state = result.post_state
        self.live.remove(v)
        return result.label


def run_pattern(
    blueprint: Blueprint,
    pattern: MeasurementPattern,
    inputs: Sequence[sv.PureState],
    rng: Optional[np.random.Generator] = None,
    lazy: bool = True,
    forced: Optional[Sequence[int]] = None,
) -> PatternResult:
    """
    Исполняет шаблон. В ленивом режиме рёбра вершины создаются перед её
    измерением, в обычном - все сразу. Выходы упорядочены как
    blueprint.outputs и исправлены по кадру Паули.

    forced задаёт сырые исходы всех измерений (перебор ветвей).
    """
    if pattern.blueprint != blueprint:
        raise PatternMismatchError("pattern was compiled for a different blueprint")
    if len(inputs) != len(blueprint.inputs):
        raise PatternMismatchError(f"pattern expects {len(blueprint.inputs)} inputs, got {len(inputs)}")
    if forced is not None and len(forced) != len(pattern.commands):
        raise PatternMismatchError("forced outcomes must cover every measurement")
    if forced is None and rng is None:
        raise ValueError("sampling measurement outcomes needs an rng")
    if not lazy and len(blueprint.vertices) > sv.PURE_QUBIT_LIMIT:
        raise QubitLimitError(f"eager execution needs {len(blueprint.vertices)} qubits")

    register = _LiveRegister(blueprint.neighbors(), dict(zip(blueprint.inputs, inputs)))
    for v in blueprint.inputs:
        register.ensure(v)
    if not lazy:
        for v in blueprint.vertices:
            register.entangle(v)

    outcomes: list[int] = []
    for index, command in enumerate(pattern.commands):
        register.entangle(command.vertex)
        x_bit = _parity(outcomes, command.adapt)
        z_bit = _parity(outcomes, command.flip)
        basis = command.basis
        if basis == "Z":
            raw = register.measure(command.vertex, "Z", rng, None if forced is None else forced[index])
            outcomes.append(raw ^ x_bit)
            continue
        angle = {"X": 0.0, "Y": math.pi / 2}.get(basis, basis)
        angle = -angle if x_bit else angle
        raw = register.measure(command.vertex, angle, rng, None if forced is None else forced[index])
        outcomes.append(raw ^ z_bit)

    for v in blueprint.outputs:
        register.entangle(v)
    order = [register.live.index(o) for o in blueprint.outputs]
    if len(order) != len(register.live):
        raise PatternMismatchError("unmeasured vertices remain outside the outputs")
    state = sv.permute_qubits(register.state, order)

    frame = []
    for position, o in enumerate(blueprint.outputs):
        correction = pattern.output_corrections.get(o, OutputCorrection())
        x_bit, z_bit = _parity(outcomes, correction.x), _parity(outcomes, correction.z)
        if x_bit:
            state = sv.apply_pauli(state, position, "X")
        if z_bit:
            state = sv.apply_pauli(state, position, "Z")
        frame.append((x_bit, z_bit))
    return PatternResult(outputs=state, frame=PauliFrame(bits=frame), outcomes=outcomes)


def enumerate_branches(
    blueprint: Blueprint,
    pattern: MeasurementPattern,
    inputs: Sequence[sv.PureState],
) -> list[PatternResult]:
    """Все ветви исходов с ненулевой вероятностью."""
    results = []
    for forced in itertools.product((0, 1), repeat=len(pattern.commands)):
        try:
            results.append(run_pattern(blueprint, pattern, inputs, forced=forced))
        except ZeroProbabilityError:
            continue
    return results


# ==========================================
# ОБРЕЗКА КЛАСТЕРА
# ==========================================

class TargetGraph(BaseModel):
    vertices: list[int]
    edges: list[tuple[int, int]] = []

    @model_validator(mode="after")
    def normalize_edges(self):
        self.edges = sorted({(min(a, b), max(a, b)) for a, b in self.edges})
        if any(a not in self.vertices or b not in self.vertices for a, b in self.edges):
            raise ValueError("target edges must join target vertices")
        return self


def parse_target_graph(text: str) -> TargetGraph:
    """
    Список смежности: строка с двумя номерами - ребро, с одним - вершина
    без рёбер. `#` начинает комментарий.
    """
    vertices: set[int] = set()
    edges = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (1, 2):
            raise ValueError(f"line {number}: expected one or two vertex ids, got {line!r}")
        try:
            ids = [int(p) for p in parts]
        except ValueError:
            raise ValueError(f"line {number}: vertex ids must be integers") from None
        if len(ids) == 2 and ids[0] == ids[1]:
            raise ValueError(f"line {number}: self-loop {ids[0]}")
        vertices.update(ids)
        if len(ids) == 2:
            edges.append(tuple(ids))
    return TargetGraph(vertices=sorted(vertices), edges=edges)


def cluster_graph(rows: int, cols: int) -> nx.Graph:
    """Кластер rows x cols; вершина (r, c) имеет номер r * cols + c."""
    if rows < 1 or cols < 1:
        raise ValueError("cluster dimensions must be positive")
    grid = nx.grid_2d_graph(rows, cols)
    return nx.relabel_nodes(grid, {(r, c): r * cols + c for r, c in grid.nodes})


def cluster_register(rows: int, cols: int) -> GraphRegister:
    register = GraphRegister()
    graph = cluster_graph(rows, cols)
    for _ in range(rows * cols):
        register.new_vertex()
    for a, b in sorted(tuple(sorted(e)) for e in graph.edges):
        register.add_cz(a, b)
    return register


def _replay(rows: int, cols: int, prelude: Sequence[tuple[int, str]], rng: np.random.Generator) -> GraphRegister:
    register = cluster_register(rows, cols)
    apply_prelude(register, prelude, rng)
    return register


def prune_cluster(rows: int, cols: int, target: TargetGraph) -> list[tuple[int, str]]:
    """
    Пролог из измерений Паули, вырезающий target из кластера: лишние вершины
    измеряются в Z, внутренние вершины путей для отсутствующих рёбер - в Y.
    Оси заданы для голого графа; apply_prelude переводит их через VOP.
    """
    cluster = cluster_graph(rows, cols)
    keep = set(target.vertices)
    if not keep <= set(cluster.nodes):
        raise UnembeddableTargetError("target vertices lie outside the cluster")

    used: set[int] = set()
    paths: list[list[int]] = []
    for a, b in target.edges:
        if cluster.has_edge(a, b):
            continue
        allowed = (set(cluster.nodes) - keep - used) | {a, b}
        try:
            path = nx.shortest_path(cluster.subgraph(allowed), a, b)
        except nx.NetworkXNoPath:
            raise UnembeddableTargetError(f"no free path for target edge {a}-{b}") from None
        used |= set(path[1:-1])
        paths.append(path[1:-1])

    prelude = [(v, "Z") for v in sorted(set(cluster.nodes) - keep - used)]
    for path in paths:
        prelude += [(v, "Y") for v in path]

    # рёбра после пролога не зависят от исходов, хватает одного прогона
    check = _replay(rows, cols, prelude, np.random.default_rng(0))
    if check.vertices != sorted(keep) or check.edges != target.edges:
        raise UnembeddableTargetError("Pauli pruning cannot reproduce the target adjacency")
    return prelude


def apply_prelude(register: GraphRegister, prelude: Sequence[tuple[int, str]], rng: np.random.Generator) -> list[int]:
    """Измеряет каждую вершину так, чтобы на голом графе действовала заданная ось."""
    return [register.measure_pauli(v, register.physical_axis(v, axis), rng) for v, axis in prelude]


def run_pruned(rows: int, cols: int, target: TargetGraph, rng: np.random.Generator) -> tuple[GraphRegister, sv.PureState]:
    """Пролог на графовом бэкенде, затем плотное состояние оставшихся вершин."""
    prelude = prune_cluster(rows, cols, target)
    register = _replay(rows, cols, prelude, rng)
    logger.info("pruned %dx%d cluster to %d vertices with %d measurements",
                rows, cols, len(register), len(prelude))
    return register, to_dense(register)
