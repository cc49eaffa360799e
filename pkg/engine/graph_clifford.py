"""
Графовый регистр: смежность плюс локальный клиффорд (VOP) на каждой вершине.

Представляемое состояние: (прод. VOP_v) * (прод. по рёбрам CZ) * |+...+>.
Вершины нумеруются монотонно и не переиспользуются.
"""
import itertools
import logging
from functools import lru_cache
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict

from engine import clifford
from engine import statevec as sv
from exceptions import (
    DeadVertexError,
    FrozenRegisterError,
    QubitIndexError,
    QubitLimitError,
    ZeroNormProjectionError,
    ZeroProbabilityError,
)

logger = logging.getLogger("graph_clifford")

LC_CHECK_LIMIT = 6


class PauliByproduct(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: bool
    z: bool


class GraphRegister:
    def __init__(self):
        self.graph = nx.Graph()
        self.vertex_ops: dict[int, int] = {}
        self._next_id = 0
        self.frozen = False

    # === СОСТОЯНИЕ ===

    @property
    def vertices(self) -> list[int]:
        return sorted(self.graph.nodes)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(tuple(sorted(e)) for e in self.graph.edges)

    def __len__(self) -> int:
        return self.graph.number_of_nodes()

    def __contains__(self, v: int) -> bool:
        return v in self.graph

    def neighbors(self, v: int) -> set[int]:
        self._check_live(v)
        return set(self.graph[v])

    def freeze(self) -> "GraphRegister":
        """Запрещает дальнейшие изменения (для чтения из нескольких потоков)."""
        self.frozen = True
        return self

    def pauli_byproducts(self) -> dict[int, PauliByproduct]:
        result = {}
        for v in self.vertices:
            x, z = clifford.pauli_part(self.vertex_ops[v])
            result[v] = PauliByproduct(x=bool(x), z=bool(z))
        return result

    def _check_live(self, *vertices: int) -> None:
        for v in vertices:
            if v not in self.graph:
                raise DeadVertexError(f"vertex {v} is not live")

    def _check_mutable(self) -> None:
        if self.frozen:
            raise FrozenRegisterError("register is frozen")

    # === БАЗОВЫЕ ОПЕРАЦИИ ===

    def new_vertex(self) -> int:
        self._check_mutable()
        v = self._next_id
        self._next_id += 1
        self.graph.add_node(v)
        self.vertex_ops[v] = clifford.IDENTITY
        return v

    def apply_local_clifford(self, v: int, c: int) -> None:
        """VOP(v) <- c * VOP(v)."""
        self._check_mutable()
        self._check_live(v)
        self.vertex_ops[v] = clifford.multiply(c, self.vertex_ops[v])

    def toggle_edge(self, a: int, b: int) -> None:
        if self.graph.has_edge(a, b):
            self.graph.remove_edge(a, b)
        else:
            self.graph.add_edge(a, b)

    def local_complement(self, v: int) -> None:
        """
        Локальное дополнение в v: рёбра внутри окрестности инвертируются,
        VOP корректируются так, что состояние не меняется.
        """
        self._check_mutable()
        self._check_live(v)
        neighbourhood = sorted(self.graph[v])
        for a, b in itertools.combinations(neighbourhood, 2):
            self.toggle_edge(a, b)
        self.vertex_ops[v] = clifford.multiply(self.vertex_ops[v], clifford.LC_CENTER)
        for b in neighbourhood:
            self.vertex_ops[b] = clifford.multiply(self.vertex_ops[b], clifford.LC_NEIGHBOR)

    def _remove_vop(self, x: int, avoid: int) -> None:
        # нужен сосед, отличный от avoid; ребро x-c при этом сохраняется
        c = min(n for n in self.graph[x] if n != avoid)
        for step in clifford.reduction_word(self.vertex_ops[x]):
            self.local_complement(x if step == clifford.CENTER_STEP else c)
        if self.vertex_ops[x] != clifford.IDENTITY:
            raise RuntimeError(f"vertex operator of {x} was not cleared")

    def _has_other_neighbors(self, x: int, y: int) -> bool:
        return any(n != y for n in self.graph[x])

    def add_cz(self, a: int, b: int) -> None:
        self._check_mutable()
        self._check_live(a, b)
        if a == b:
            raise QubitIndexError("add_cz needs two distinct vertices")

        # Недиагональные VOP при "чужих" соседях снимаются дополнениями.
        # Диагональность второй вершины при этом сохраняется.
        while True:
            pending = [
                (x, y) for x, y in ((a, b), (b, a))
                if not clifford.is_diagonal(self.vertex_ops[x]) and self._has_other_neighbors(x, y)
            ]
            if not pending:
                break
            self._remove_vop(*pending[0])

        diag_a = clifford.is_diagonal(self.vertex_ops[a])
        diag_b = clifford.is_diagonal(self.vertex_ops[b])
        if diag_a and diag_b:
            self.toggle_edge(a, b)
            return
        if not diag_a and not diag_b:
            self._cz_isolated_pair(a, b)
            return

        x, y = (a, b) if not diag_a else (b, a)
        if self.graph.has_edge(x, y):
            sign, axis = clifford.image(self.vertex_ops[x], "X")
            if axis == "Z":
                # на голом графе X_x действует как Z_y: CZ сводится к Z_y либо к I
                if sign > 0:
                    self.vertex_ops[y] = clifford.multiply(self.vertex_ops[y], clifford.PAULI_Z)
                return
            for _ in range(4):
                if clifford.is_diagonal(self.vertex_ops[x]):
                    break
                self.local_complement(x)
            if not clifford.is_diagonal(self.vertex_ops[x]):
                raise RuntimeError(f"vertex operator of {x} did not become diagonal")
            self.toggle_edge(x, y)
            return

        # x изолирована: её состояние C|+> - собственный вектор C X C^dagger
        sign, axis = clifford.image(self.vertex_ops[x], "X")
        if axis == "Z":
            if sign < 0:
                # x в |1>: CZ даёт Z на y
                self.vertex_ops[y] = clifford.multiply(clifford.PAULI_Z, self.vertex_ops[y])
            return
        self.vertex_ops[x] = clifford.diagonal_with_x_image(sign, axis)
        self.toggle_edge(x, y)

    def _cz_isolated_pair(self, a: int, b: int) -> None:
        edge = self.graph.has_edge(a, b)
        new_a, new_b, new_edge = _isolated_pair_cz(self.vertex_ops[a], self.vertex_ops[b], edge)
        self.vertex_ops[a] = new_a
        self.vertex_ops[b] = new_b
        if new_edge != edge:
            self.toggle_edge(a, b)

    # === ИЗМЕРЕНИЯ ===

    def physical_axis(self, v: int, bare_axis: str) -> str:
        """Ось, измерение которой действует на голом графе как bare_axis."""
        self._check_live(v)
        return clifford.image(self.vertex_ops[v], bare_axis)[1]

    def measure_pauli(
        self,
        v: int,
        axis: str,
        rng: np.random.Generator | None = None,
        outcome: int | None = None,
    ) -> int:
        """
        Измерение Паули axis на вершине v; вершина удаляется.

        Наблюдаемая сводится локальными дополнениями к +-Z на голой вершине.
        Детерминированный случай (изолированная вершина, наблюдаемая +-X)
        определяется точно и не расходует rng.
        """
        self._check_mutable()
        self._check_live(v)
        if axis not in clifford.AXES:
            raise ValueError(f"unknown Pauli axis {axis!r}")

        for _ in range(3):
            sign, bare = clifford.heisenberg(self.vertex_ops[v], axis)
            if bare == "Z":
                break
            if bare == "Y":
                self.local_complement(v)
                continue
            neighbourhood = sorted(self.graph[v])
            if not neighbourhood:
                result = 0 if sign > 0 else 1
                if outcome is not None and outcome != result:
                    raise ZeroProbabilityError(f"outcome {outcome} on vertex {v} has zero probability")
                self._delete(v)
                return result
            self.local_complement(neighbourhood[0])
        else:
            raise RuntimeError(f"measured observable on {v} did not reduce to Z")

        if outcome is None:
            if rng is None:
                raise ValueError("random measurement needs an rng")
            bare_outcome = int(rng.integers(2))
        else:
            bare_outcome = int(outcome) ^ (1 if sign < 0 else 0)
        if bare_outcome:
            for b in self.graph[v]:
                self.vertex_ops[b] = clifford.multiply(self.vertex_ops[b], clifford.PAULI_Z)
        self._delete(v)
        return bare_outcome ^ (1 if sign < 0 else 0)

    def _delete(self, v: int) -> None:
        self.graph.remove_node(v)
        del self.vertex_ops[v]

    def parity_project(self, a: int, b: int, q: complex) -> None:
        """
        Проекция |10><10| + q|01><01| на пару (a, b), q из {1, -1, i, -i}.

        Нечётная чётность вырезается вспомогательной вершиной с
        принудительным исходом X-измерения, затем на b ставится diag(1, q).
        """
        self._check_live(a, b)
        phases = {1: clifford.IDENTITY, -1: clifford.PAULI_Z, 1j: clifford.PHASE, -1j: clifford.PHASE_DAG}
        key = complex(np.round(q.real, 12), np.round(q.imag, 12)) if isinstance(q, complex) else q
        if key not in phases:
            raise ValueError(f"parity phase must be one of +-1, +-i, got {q}")
        ancilla = self.new_vertex()
        self.add_cz(a, ancilla)
        self.add_cz(b, ancilla)
        try:
            self.measure_pauli(ancilla, "X", outcome=1)
        except ZeroProbabilityError:
            self._delete(ancilla)
            raise ZeroNormProjectionError(f"vertices {a}, {b} have no odd-parity component") from None
        self.apply_local_clifford(b, phases[key])


@lru_cache(maxsize=None)
def _pair_candidates() -> tuple[np.ndarray, tuple]:
    """Все состояния (C_a x C_b) CZ^e |++> в порядке (a - старший кубит)."""
    plus = np.full(4, 0.5, dtype=complex)
    graph_states = (plus, plus * np.array([1, 1, 1, -1]))
    vectors, labels = [], []
    for ca, cb, e in itertools.product(range(clifford.GROUP_ORDER), range(clifford.GROUP_ORDER), (0, 1)):
        op = np.kron(clifford.MATRICES[ca], clifford.MATRICES[cb])
        vectors.append(op @ graph_states[e])
        labels.append((ca, cb, e))
    return np.array(vectors), tuple(labels)


@lru_cache(maxsize=None)
def _isolated_pair_cz(ca: int, cb: int, edge: bool) -> tuple[int, int, bool]:
    vectors, labels = _pair_candidates()
    index = labels.index((ca, cb, int(edge)))
    target = vectors[index] * np.array([1, 1, 1, -1])
    overlaps = np.abs(vectors.conj() @ target)
    match = np.flatnonzero(overlaps > 1 - 1e-9)
    if not len(match):
        raise RuntimeError("CZ on an isolated pair left the graph-state orbit")
    # предпочтение кандидату с диагональными VOP
    best = min(match, key=lambda i: (not (clifford.is_diagonal(labels[i][0]) and clifford.is_diagonal(labels[i][1])), i))
    ca_new, cb_new, e_new = labels[best]
    return ca_new, cb_new, bool(e_new)


# ==========================================
# ПЛОТНОЕ ПРЕДСТАВЛЕНИЕ И ЭКСПОРТ
# ==========================================

def to_dense(g: GraphRegister, vertices: Sequence[int] | None = None) -> sv.PureState:
    """
    Плотное состояние регистра; кубит i - i-я вершина в порядке возрастания.

    vertices ограничивает вывод объединением компонент связности; рёбра,
    выходящие из подмножества, дают ошибку.
    """
    chosen = g.vertices if vertices is None else sorted(vertices)
    g._check_live(*chosen)
    if not chosen:
        return sv.scalar_state()
    if len(chosen) > sv.PURE_QUBIT_LIMIT:
        raise QubitLimitError(f"{len(chosen)} vertices exceed dense limit {sv.PURE_QUBIT_LIMIT}")
    position = {v: i for i, v in enumerate(chosen)}
    state = sv.init_plus(len(chosen))
    for a, b in g.edges:
        if (a in position) != (b in position):
            raise QubitIndexError(f"edge {a}-{b} leaves the selected vertices")
        if a in position:
            state = sv.apply_cz(state, position[a], position[b])
    for v in chosen:
        if g.vertex_ops[v] != clifford.IDENTITY:
            state = sv.apply_1q(state, position[v], clifford.matrix(g.vertex_ops[v]))
    return state


def export_adjacency(g: GraphRegister) -> str:
    return "".join(f"{a} {b}\n" for a, b in g.edges)


def export_dot(g: GraphRegister) -> str:
    lines = ["graph G {"]
    lines += [f"  {v};" for v in g.vertices if g.graph.degree(v) == 0]
    lines += [f"  {a} -- {b};" for a, b in g.edges]
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_adjacency(text: str) -> list[tuple[int, int]]:
    edges = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {number}: expected two vertex ids, got {line!r}")
        a, b = int(parts[0]), int(parts[1])
        if a == b:
            raise ValueError(f"line {number}: self-loop {a}")
        edges.append((min(a, b), max(a, b)))
    return sorted(set(edges))


def graph_state(num_vertices: int, edges: Iterable[tuple[int, int]]) -> sv.PureState:
    """Плотный графовый эталон: CZ по рёбрам на |+...+>."""
    state = sv.init_plus(num_vertices)
    for a, b in edges:
        state = sv.apply_cz(state, a, b)
    return state


# ==========================================
# ЛОКАЛЬНАЯ КЛИФФОРДОВА ЭКВИВАЛЕНТНОСТЬ
# ==========================================

_PAIRS = [(p, q) for p in clifford.AXES for q in clifford.AXES if p != q]


def lc_equivalent(state: sv.PureState, edges: Iterable[tuple[int, int]], tol: float = sv.ACCUM_TOL) -> bool:
    """
    Проверяет, что state локально-клиффордово эквивалентен графовому состоянию
    с рёбрами edges (кубит i - вершина i).

    Для каждого кубита перебирается пара антикоммутирующих Паули (P_v, Q_v);
    состояние эквивалентно, если все операторы P_v * прод_{w in N(v)} Q_w
    стабилизируют его с точностью до знака.
    """
    n = state.num_qubits
    if n > LC_CHECK_LIMIT:
        raise QubitLimitError(f"LC check supports at most {LC_CHECK_LIMIT} qubits")
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(edges)
    if graph.number_of_nodes() != n:
        raise QubitIndexError("edge endpoints exceed the state's qubit count")
    choice: list[tuple[str, str]] = []

    def generator_holds(v: int) -> bool:
        s = sv.apply_pauli(state, v, choice[v][0])
        for w in graph[v]:
            s = sv.apply_pauli(s, w, choice[w][1])
        return abs(abs(sv.overlap(state, s)) - 1.0) <= tol

    def search(k: int) -> bool:
        if k == n:
            return True
        for pair in _PAIRS:
            choice.append(pair)
            # генератор v проверяем, когда выбраны v и все его соседи
            ready = [v for v in range(k + 1) if v == k or k in graph[v]]
            ready = [v for v in ready if all(w <= k for w in graph[v])]
            if all(generator_holds(v) for v in ready) and search(k + 1):
                return True
            choice.pop()
        return False

    return search(0)
