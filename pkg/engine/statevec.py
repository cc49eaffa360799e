"""
Плотный бэкенд: чистые состояния (до 20 кубитов) и матрицы плотности (до 10).

Служит оракулом для всех остальных модулей.

Нумерация кубитов little-endian: кубит 0 - младший бит индекса базиса.
В записи |AB> или |ABC> левая метка соответствует старшему биту.
"""
import json
import logging
import os
from typing import Iterable, Literal, Sequence

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from exceptions import (
    NonUnitaryError,
    NormalizationError,
    QubitIndexError,
    QubitLimitError,
    ZeroProbabilityError,
)

load_dotenv()

logger = logging.getLogger("statevec")

PURE_QUBIT_LIMIT = int(os.getenv("PURE_QUBIT_LIMIT", "20"))
DENSITY_QUBIT_LIMIT = int(os.getenv("DENSITY_QUBIT_LIMIT", "10"))

# Алгебраические тождества / накопленная арифметика
EXACT_TOL = 1e-12
ACCUM_TOL = 1e-10

PauliAxis = Literal["X", "Y", "Z"]

# === СТАНДАРТНЫЕ МАТРИЦЫ ===
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
PAULI = {"X": X, "Y": Y, "Z": Z}


def uz(theta: float) -> np.ndarray:
    """Фазовый поворот diag(1, e^{i theta})."""
    return np.diag([1.0, np.exp(1j * theta)]).astype(complex)


def _check_pure(num_qubits: int, amplitudes: np.ndarray) -> None:
    if num_qubits > PURE_QUBIT_LIMIT:
        raise QubitLimitError(f"{num_qubits} qubits exceed pure-state limit {PURE_QUBIT_LIMIT}")
    if amplitudes.shape != (2 ** num_qubits,):
        raise ValueError(f"amplitudes must have length {2 ** num_qubits}")
    norm = float(np.vdot(amplitudes, amplitudes).real)
    if abs(norm - 1.0) > ACCUM_TOL:
        raise NormalizationError(f"squared norm {norm} differs from 1")


def _check_density(num_qubits: int, matrix: np.ndarray) -> None:
    if num_qubits > DENSITY_QUBIT_LIMIT:
        raise QubitLimitError(f"{num_qubits} qubits exceed density limit {DENSITY_QUBIT_LIMIT}")
    dim = 2 ** num_qubits
    if matrix.shape != (dim, dim):
        raise ValueError(f"matrix must be {dim}x{dim}")
    if not np.allclose(matrix, matrix.conj().T, atol=ACCUM_TOL):
        raise NormalizationError("density matrix is not Hermitian")
    trace = np.trace(matrix).real
    if abs(trace - 1.0) > ACCUM_TOL:
        raise NormalizationError(f"trace {trace} differs from 1")
    if np.linalg.eigvalsh(matrix).min() < -ACCUM_TOL:
        raise NormalizationError("density matrix has a negative eigenvalue")


# Проверки в __init__: наружу выходят QubitLimitError и NormalizationError,
# а не ValidationError.
class PureState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    num_qubits: int = Field(ge=0)
    amplitudes: np.ndarray

    def __init__(self, num_qubits: int, amplitudes: np.ndarray):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        _check_pure(int(num_qubits), amplitudes)
        super().__init__(num_qubits=num_qubits, amplitudes=amplitudes)

    @classmethod
    def from_amplitudes(cls, amplitudes: Iterable[complex], normalize: bool = False) -> "PureState":
        amps = np.asarray(list(amplitudes) if not isinstance(amplitudes, np.ndarray) else amplitudes,
                          dtype=complex)
        n = int(round(np.log2(len(amps)))) if len(amps) else -1
        if n < 0 or 2 ** n != len(amps):
            raise ValueError("amplitude vector length must be a power of two")
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise NormalizationError("cannot normalize a zero vector")
            amps = amps / norm
        return cls(num_qubits=n, amplitudes=amps)

    def probability_of(self, index: int) -> float:
        return float(abs(self.amplitudes[index]) ** 2)


class DensityState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    num_qubits: int = Field(ge=0)
    matrix: np.ndarray

    def __init__(self, num_qubits: int, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=complex)
        _check_density(int(num_qubits), matrix)
        super().__init__(num_qubits=num_qubits, matrix=matrix)


class MeasurementOutcome(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    label: int = Field(ge=0, le=1)
    probability: float = Field(ge=0.0, le=1.0 + EXACT_TOL)
    post_state: PureState | DensityState


# ==========================================
# КОНСТРУКТОРЫ
# ==========================================

def _check_size(n: int) -> None:
    if n < 1:
        raise ValueError("register needs at least one qubit")
    if n > PURE_QUBIT_LIMIT:
        raise QubitLimitError(f"{n} qubits exceed pure-state limit {PURE_QUBIT_LIMIT}")


def scalar_state() -> PureState:
    """Пустой регистр (0 кубитов, амплитуда 1)."""
    return PureState(num_qubits=0, amplitudes=np.ones(1, dtype=complex))


def init_plus(n: int) -> PureState:
    _check_size(n)
    dim = 2 ** n
    return PureState(num_qubits=n, amplitudes=np.full(dim, dim ** -0.5, dtype=complex))


def basis_state(bits: str) -> PureState:
    """|bits> в записи "слева направо": basis_state("01") = |0>_1 |1>_0."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bit string {bits!r}")
    _check_size(len(bits))
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return PureState(num_qubits=len(bits), amplitudes=amps)


def single_qubit(alpha: complex, beta: complex) -> PureState:
    return PureState.from_amplitudes([alpha, beta], normalize=True)


def kron_states(*states: PureState) -> PureState:
    """Тензорное произведение; первый аргумент занимает старшие кубиты."""
    amps = np.ones(1, dtype=complex)
    for state in states:
        amps = np.kron(amps, state.amplitudes)
    n = sum(state.num_qubits for state in states)
    if n > PURE_QUBIT_LIMIT:
        raise QubitLimitError(f"{n} qubits exceed pure-state limit {PURE_QUBIT_LIMIT}")
    return PureState(num_qubits=n, amplitudes=amps)


def append_qubit(s: PureState, qubit: PureState | None = None) -> PureState:
    """Добавляет кубит старшим индексом (по умолчанию в |+>)."""
    qubit = qubit if qubit is not None else init_plus(1)
    if qubit.num_qubits != 1:
        raise ValueError("append_qubit expects a single-qubit state")
    return kron_states(qubit, s)


# ==========================================
# ОПЕРАЦИИ
# ==========================================

def _check_index(s: PureState | DensityState, *qubits: int) -> None:
    for q in qubits:
        if not 0 <= q < s.num_qubits:
            raise QubitIndexError(f"qubit {q} out of range for {s.num_qubits}-qubit register")
    if len(set(qubits)) != len(qubits):
        raise QubitIndexError(f"qubit indices must differ: {qubits}")


def _axis(n: int, q: int) -> int:
    return n - 1 - q


def check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, I2, atol=ACCUM_TOL):
        raise NonUnitaryError("matrix is not a 2x2 unitary")
    return u


def apply_1q(s: PureState, q: int, u: np.ndarray) -> PureState:
    u = check_unitary(u)
    _check_index(s, q)
    n = s.num_qubits
    axis = _axis(n, q)
    psi = s.amplitudes.reshape((2,) * n)
    psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [axis])), 0, axis)
    return PureState(num_qubits=n, amplitudes=psi.reshape(-1))


def apply_pauli(s: PureState, q: int, axis: PauliAxis) -> PureState:
    return apply_1q(s, q, PAULI[axis])


def apply_cz(s: PureState, a: int, b: int) -> PureState:
    _check_index(s, a, b)
    idx = np.arange(2 ** s.num_qubits)
    both = ((idx >> a) & 1) & ((idx >> b) & 1)
    amps = np.where(both == 1, -s.amplitudes, s.amplitudes)
    return PureState(num_qubits=s.num_qubits, amplitudes=amps)


def apply_diagonal(s: PureState, qubits: Sequence[int], diag: Sequence[complex]) -> np.ndarray:
    """
    Диагональный оператор на подмножестве кубитов (без нормировки в ответе).

    Возвращает ненормированный вектор амплитуд; diag индексируется битами
    qubits[0] (старший) ... qubits[-1] (младший).
    """
    _check_index(s, *qubits)
    idx = np.arange(2 ** s.num_qubits)
    local = np.zeros_like(idx)
    for q in qubits:
        local = (local << 1) | ((idx >> q) & 1)
    return np.asarray(diag, dtype=complex)[local] * s.amplitudes


def permute_qubits(s: PureState, order: Sequence[int]) -> PureState:
    """Новый кубит j - это старый кубит order[j]."""
    n = s.num_qubits
    if sorted(order) != list(range(n)):
        raise QubitIndexError(f"order {list(order)} is not a permutation of {n} qubits")
    psi = s.amplitudes.reshape((2,) * n)
    # ось новой j-й позиции берётся из оси старого кубита order[j]
    axes = [_axis(n, order[_axis(n, new_axis)]) for new_axis in range(n)]
    return PureState(num_qubits=n, amplitudes=np.transpose(psi, axes).reshape(-1))


def basis_vectors(basis: float | PauliAxis) -> tuple[np.ndarray, np.ndarray]:
    """Векторы |A> (исход 0) и |B> (исход 1)."""
    if basis == "Z":
        return np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    if basis == "X":
        phi = 0.0
    elif basis == "Y":
        phi = np.pi / 2
    elif isinstance(basis, str):
        raise ValueError(f"unknown measurement basis {basis!r}")
    else:
        phi = float(basis)
    phase = np.exp(1j * phi)
    return (np.array([1, phase], dtype=complex) / np.sqrt(2),
            np.array([1, -phase], dtype=complex) / np.sqrt(2))


def _project_out(s: PureState, q: int, vector: np.ndarray) -> np.ndarray:
    n = s.num_qubits
    psi = s.amplitudes.reshape((2,) * n)
    return np.tensordot(vector.conj(), psi, axes=([0], [_axis(n, q)])).reshape(-1)


def outcome_probabilities(s: PureState, q: int, basis: float | PauliAxis) -> tuple[float, float]:
    _check_index(s, q)
    branches = [_project_out(s, q, v) for v in basis_vectors(basis)]
    return tuple(float(np.vdot(b, b).real) for b in branches)


def measure_basis(
    s: PureState,
    q: int,
    basis: float | PauliAxis,
    rng: np.random.Generator,
    outcome: int | None = None,
) -> MeasurementOutcome:
    """
    Измерение кубита q в базисе {|A>, |B>} с удалением кубита из регистра.

    basis - угол phi в плоскости xy (|A> = (|0> + e^{i phi}|1>)/sqrt2) либо ось
    "X", "Y", "Z". outcome принудительно выбирает ветвь; ветвь с нулевой
    вероятностью даёт ZeroProbabilityError. Без outcome расходуется ровно одно
    число из rng.
    """
    _check_index(s, q)
    branches = [_project_out(s, q, v) for v in basis_vectors(basis)]
    probs = [float(np.vdot(b, b).real) for b in branches]
    if outcome is None:
        label = 0 if rng.random() < probs[0] else 1
    else:
        label = int(outcome)
        if label not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {outcome}")
    if probs[label] < EXACT_TOL:
        raise ZeroProbabilityError(f"outcome {label} on qubit {q} has zero probability")
    post = branches[label] / np.sqrt(probs[label])
    return MeasurementOutcome(
        label=label,
        probability=min(probs[label], 1.0),
        post_state=PureState(num_qubits=s.num_qubits - 1, amplitudes=post),
    )


# ==========================================
# СРАВНЕНИЕ И СМЕСИ
# ==========================================

def overlap(a: PureState, b: PureState) -> complex:
    if a.num_qubits != b.num_qubits:
        raise QubitIndexError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def states_equal_up_to_global_phase(a: PureState, b: PureState, tol: float = ACCUM_TOL) -> bool:
    return abs(1.0 - abs(overlap(a, b))) <= tol


def to_density(s: PureState) -> DensityState:
    return DensityState(num_qubits=s.num_qubits, matrix=np.outer(s.amplitudes, s.amplitudes.conj()))


def density_from_matrix(matrix: np.ndarray, normalize: bool = False) -> DensityState:
    matrix = np.asarray(matrix, dtype=complex)
    if normalize:
        trace = np.trace(matrix).real
        if trace <= 0:
            raise NormalizationError("cannot normalize a zero-trace operator")
        matrix = matrix / trace
    n = int(round(np.log2(matrix.shape[0])))
    return DensityState(num_qubits=n, matrix=matrix)


def mix(components: Sequence[tuple[float, DensityState]]) -> DensityState:
    if not components:
        raise NormalizationError("mixture needs at least one component")
    total = sum(p for p, _ in components)
    if abs(total - 1.0) > ACCUM_TOL or any(p < 0 for p, _ in components):
        raise NormalizationError(f"mixture weights sum to {total}")
    n = components[0][1].num_qubits
    if any(rho.num_qubits != n for _, rho in components):
        raise QubitIndexError("mixture components differ in size")
    matrix = sum(p * rho.matrix for p, rho in components)
    return DensityState(num_qubits=n, matrix=matrix)


def fidelity(rho: DensityState, psi: PureState) -> float:
    if rho.num_qubits != psi.num_qubits:
        raise QubitIndexError("dimension mismatch")
    return float(np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes).real)


def maximally_mixed(n: int) -> DensityState:
    dim = 2 ** n
    return DensityState(num_qubits=n, matrix=np.eye(dim, dtype=complex) / dim)


def partial_trace(rho: DensityState | PureState, keep: Sequence[int]) -> DensityState:
    """Редуцированное состояние на кубитах keep (в порядке возрастания индексов)."""
    if isinstance(rho, PureState):
        n = rho.num_qubits
        keep = sorted(keep)
        _check_index(rho, *keep)
        traced = [q for q in range(n) if q not in keep]
        psi = rho.amplitudes.reshape((2,) * n)
        # кубиты keep в порядке убывания -> оси в порядке возрастания
        keep_axes = [_axis(n, q) for q in reversed(keep)]
        psi = np.transpose(psi, keep_axes + [_axis(n, q) for q in reversed(traced)])
        m = psi.reshape(2 ** len(keep), -1)
        return DensityState(num_qubits=len(keep), matrix=m @ m.conj().T)
    n = rho.num_qubits
    keep = sorted(keep)
    _check_index(rho, *keep)
    traced = [q for q in range(n) if q not in keep]
    tensor = rho.matrix.reshape((2,) * (2 * n))
    for q in sorted(traced, reverse=True):
        # после каждого следа число кубитов уменьшается
        cur = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=_axis(cur, q), axis2=cur + _axis(cur, q))
    dim = 2 ** len(keep)
    return DensityState(num_qubits=len(keep), matrix=tensor.reshape(dim, dim))


def partial_transpose(rho: DensityState, qubits: Sequence[int]) -> np.ndarray:
    n = rho.num_qubits
    _check_index(rho, *qubits)
    tensor = rho.matrix.reshape((2,) * (2 * n))
    perm = list(range(2 * n))
    for q in qubits:
        row, col = _axis(n, q), n + _axis(n, q)
        perm[row], perm[col] = perm[col], perm[row]
    return np.transpose(tensor, perm).reshape(2 ** n, 2 ** n)


def negativity(rho: DensityState, qubits: Sequence[int]) -> float:
    eigenvalues = np.linalg.eigvalsh(partial_transpose(rho, qubits))
    return float(-eigenvalues[eigenvalues < 0].sum())


def is_ppt(rho: DensityState, qubits: Sequence[int], tol: float = ACCUM_TOL) -> bool:
    """Критерий Переса: частичная транспозиция без отрицательных собственных значений."""
    return bool(np.linalg.eigvalsh(partial_transpose(rho, qubits)).min() >= -tol)


def schmidt_coefficients(s: PureState, qubits: Sequence[int]) -> np.ndarray:
    """Коэффициенты Шмидта разбиения qubits | остальные (по убыванию)."""
    n = s.num_qubits
    _check_index(s, *qubits)
    rest = [q for q in range(n) if q not in qubits]
    psi = s.amplitudes.reshape((2,) * n)
    axes = [_axis(n, q) for q in qubits] + [_axis(n, q) for q in rest]
    m = np.transpose(psi, axes).reshape(2 ** len(qubits), -1)
    return np.linalg.svd(m, compute_uv=False)


# ==========================================
# ДАМП СОСТОЯНИЯ
# ==========================================

def dump_state(s: PureState) -> str:
    payload = {
        "num_qubits": s.num_qubits,
        "amplitudes": [[float(a.real), float(a.imag)] for a in s.amplitudes],
    }
    return json.dumps(payload)


def load_state(text: str) -> PureState:
    payload = json.loads(text)
    amps = np.array([complex(re, im) for re, im in payload["amplitudes"]], dtype=complex)
    return PureState(num_qubits=int(payload["num_qubits"]), amplitudes=amps)
