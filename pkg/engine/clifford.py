"""
Группа локальных Клиффордов (24 элемента по модулю глобальной фазы).

Элементы строятся перебором в ширину по образующим H и S; индекс 0 - тождество.
Все таблицы (умножение, обращение, действие сопряжением на Паули) считаются
один раз при импорте.
"""
from collections import deque

import numpy as np

from engine.statevec import H, I2, S, X, Y, Z
from exceptions import CliffordIndexError

GROUP_ORDER = 24
AXES = ("X", "Y", "Z")
_PAULI_BY_AXIS = {"X": X, "Y": Y, "Z": Z}


def _canonical(m: np.ndarray) -> np.ndarray:
    # первая ненулевая компонента делается вещественной положительной
    flat = m.reshape(-1)
    lead = flat[np.flatnonzero(np.abs(flat) > 1e-9)[0]]
    return m / (lead / abs(lead))


def _key(m: np.ndarray) -> tuple:
    return tuple(np.round(_canonical(m).reshape(-1), 8))


def _enumerate() -> list[np.ndarray]:
    matrices = [I2.copy()]
    seen = {_key(I2): 0}
    queue = deque([0])
    while queue:
        current = matrices[queue.popleft()]
        for generator in (H, S):
            candidate = _canonical(generator @ current)
            key = _key(candidate)
            if key not in seen:
                seen[key] = len(matrices)
                matrices.append(candidate)
                queue.append(seen[key])
    if len(matrices) != GROUP_ORDER:
        raise RuntimeError(f"local Clifford enumeration produced {len(matrices)} elements")
    return matrices


MATRICES: list[np.ndarray] = _enumerate()
_INDEX = {_key(m): i for i, m in enumerate(MATRICES)}


def lookup(matrix: np.ndarray) -> int:
    """Индекс клиффорда, равного matrix с точностью до фазы."""
    matrix = np.asarray(matrix, dtype=complex)
    try:
        return _INDEX[_key(matrix)]
    except (KeyError, IndexError):
        raise CliffordIndexError("matrix is not a single-qubit Clifford") from None


def _signed_axis(m: np.ndarray) -> tuple[int, str]:
    for axis, pauli in _PAULI_BY_AXIS.items():
        for sign in (1, -1):
            if np.allclose(m, sign * pauli, atol=1e-9):
                return sign, axis
    raise RuntimeError("conjugation left the Pauli group")


MULT = np.array([[lookup(a @ b) for b in MATRICES] for a in MATRICES], dtype=np.int64)
INV = np.array([lookup(m.conj().T) for m in MATRICES], dtype=np.int64)

# C^dagger P C = sign * axis (картина Гейзенберга)
_HEISENBERG = [
    {axis: _signed_axis(c.conj().T @ _PAULI_BY_AXIS[axis] @ c) for axis in AXES}
    for c in MATRICES
]
# C P C^dagger = sign * axis
_IMAGE = [
    {axis: _signed_axis(c @ _PAULI_BY_AXIS[axis] @ c.conj().T) for axis in AXES}
    for c in MATRICES
]

DIAGONAL = frozenset(
    i for i, m in enumerate(MATRICES) if abs(m[0, 1]) < 1e-9 and abs(m[1, 0]) < 1e-9
)

# === ИМЕНОВАННЫЕ ЭЛЕМЕНТЫ ===
IDENTITY = 0
HADAMARD = lookup(H)
PHASE = lookup(S)
PHASE_DAG = lookup(S.conj().T)
PAULI_X = lookup(X)
PAULI_Y = lookup(Y)
PAULI_Z = lookup(Z)
PAULIS = (IDENTITY, PAULI_X, PAULI_Y, PAULI_Z)

# Локальное дополнение в вершине a: VOP(a) <- VOP(a) * sqrt(-iX)^dagger,
# VOP(b) <- VOP(b) * sqrt(iZ)^dagger для соседей b
LC_CENTER = lookup(((I2 - 1j * X) / np.sqrt(2)).conj().T)
LC_NEIGHBOR = lookup(((I2 + 1j * Z) / np.sqrt(2)).conj().T)

# Шаги разложения: "center" - дополнение в самой вершине, "neighbor" - в её соседе
CENTER_STEP = "center"
NEIGHBOR_STEP = "neighbor"


def _reduction_words() -> dict[int, tuple[str, ...]]:
    """Кратчайшие слова w с произведением шагов, равным элементу группы."""
    steps = ((CENTER_STEP, LC_CENTER), (NEIGHBOR_STEP, LC_NEIGHBOR))
    words = {IDENTITY: ()}
    queue = deque([IDENTITY])
    while queue:
        current = queue.popleft()
        for name, element in steps:
            nxt = int(MULT[current, element])
            if nxt not in words:
                words[nxt] = words[current] + (name,)
                queue.append(nxt)
    if len(words) != GROUP_ORDER:
        raise RuntimeError("local complementations do not generate the local Clifford group")
    return words


_WORDS = _reduction_words()


def check_index(c: int) -> int:
    if not isinstance(c, (int, np.integer)) or not 0 <= c < GROUP_ORDER:
        raise CliffordIndexError(f"local Clifford index must be in 0..23, got {c!r}")
    return int(c)


def multiply(a: int, b: int) -> int:
    """Индекс произведения a*b (сначала действует b)."""
    return int(MULT[check_index(a), check_index(b)])


def inverse(c: int) -> int:
    return int(INV[check_index(c)])


def matrix(c: int) -> np.ndarray:
    return MATRICES[check_index(c)]


def heisenberg(c: int, axis: str) -> tuple[int, str]:
    """C^dagger P C как (знак, ось)."""
    return _HEISENBERG[check_index(c)][axis]


def image(c: int, axis: str) -> tuple[int, str]:
    """C P C^dagger как (знак, ось)."""
    return _IMAGE[check_index(c)][axis]


def is_diagonal(c: int) -> bool:
    return check_index(c) in DIAGONAL


def reduction_word(c: int) -> tuple[str, ...]:
    """Последовательность локальных дополнений, сводящая VOP c к тождеству."""
    return _WORDS[inverse(c)]


def diagonal_with_x_image(sign: int, axis: str) -> int:
    """Диагональный D с D X D^dagger = sign * axis (axis из X, Y)."""
    for d in sorted(DIAGONAL):
        if image(d, "X") == (sign, axis):
            return d
    raise CliffordIndexError(f"no diagonal Clifford maps X to {sign:+d}{axis}")


def pauli_part(c: int) -> tuple[int, int]:
    """
    Биты (x, z) паулиевой части c = P * R, где R - представитель смежного класса
    с наименьшим индексом.
    """
    c = check_index(c)
    coset = {p: int(MULT[p, c]) for p in PAULIS}
    representative = min(coset.values())
    for p, r in coset.items():
        if r == representative:
            return {IDENTITY: (0, 0), PAULI_X: (1, 0), PAULI_Y: (1, 1), PAULI_Z: (0, 1)}[p]
    raise RuntimeError("coset representative not found")
