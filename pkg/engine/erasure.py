"""
Модель одной попытки запутывания двух эмиттеров стиранием пути фотона.

Эмиттер A (левый, кубит 1) излучает в канал a_L, эмиттер B (правый, кубит 0)
в канал a_R; после светоделителя фотоны регистрируются детекторами b_L и b_R.
Уровень |e> не хранится явно: возбуждение и релаксация |1> -> |e> -> |1>
сводятся к испусканию фотона эмиттером в состоянии |1>.

Соглашение о фазе: щелчок слева даёт p = +i и состояние (|01> + i|10>)/sqrt2,
щелчок справа p = -i и (i|01> + |10>)/sqrt2. Оператор чётности
|10><10| + q|01><01| воспроизводит этот геральд при q = conj(p).
"""
import itertools
import logging
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from engine import statevec as sv
from exceptions import ZeroNormProjectionError

logger = logging.getLogger("erasure")

HERALD_PHASE = {(1, 0): 1j, (0, 1): -1j}


class Scheme(str, Enum):
    IDEAL = "ideal"
    WEAK = "weak"
    TWO_PHOTON = "two_photon"


class ApparatusParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    eta: float = Field(default=1.0, ge=0.0, le=1.0)
    dark_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    scheme: Scheme = Scheme.IDEAL
    epsilon: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    number_resolving: bool = True

    @model_validator(mode="after")
    def check_epsilon(self):
        if self.scheme == Scheme.WEAK and self.epsilon is None:
            raise ValueError("weak-excitation scheme needs epsilon")
        return self

    @classmethod
    def ideal(cls) -> "ApparatusParams":
        return cls()

    @computed_field
    @property
    def rounds(self) -> int:
        return 2 if self.scheme == Scheme.TWO_PHOTON else 1


class HeraldRecord(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    clicks_left: int = Field(ge=0)
    clicks_right: int = Field(ge=0)
    rounds: list[tuple[int, int]]
    accepted: bool
    projection_phase: Optional[complex] = None
    false_herald: bool = False
    post_state: sv.PureState | sv.DensityState

    @model_validator(mode="after")
    def check_consistency(self):
        if self.false_herald and not self.accepted:
            raise ValueError("false herald implies an accepted pattern")
        if self.accepted != (self.projection_phase is not None):
            raise ValueError("projection phase is set exactly for accepted patterns")
        return self


class HeraldedPerformance(BaseModel):
    success_prob: float
    fidelity: float
    false_herald_prob: float
    click_table: dict[str, float]


# ==========================================
# ОПТИКА
# ==========================================

def beamsplitter_map(amp_l: complex, amp_r: complex) -> tuple[complex, complex]:
    """a_L -> (i b_L + b_R)/sqrt2, a_R -> (b_L + i b_R)/sqrt2; отражение несёт фазу i."""
    root = np.sqrt(2)
    return (1j * amp_l + amp_r) / root, (amp_l + 1j * amp_r) / root


def _photon_amplitudes(emit_left: bool, emit_right: bool) -> dict[tuple[int, int], complex]:
    """Амплитуды чисел фотонов (n_L, n_R) на детекторах."""
    if not emit_left and not emit_right:
        return {(0, 0): 1.0}
    u = beamsplitter_map(1.0, 0.0)
    v = beamsplitter_map(0.0, 1.0)
    if emit_left and not emit_right:
        amplitudes = {(1, 0): u[0], (0, 1): u[1]}
    elif emit_right and not emit_left:
        amplitudes = {(1, 0): v[0], (0, 1): v[1]}
    else:
        # два фотона: (u_L b_L + u_R b_R)(v_L b_L + v_R b_R)|vac>
        amplitudes = {
            (2, 0): np.sqrt(2) * u[0] * v[0],
            (1, 1): u[0] * v[1] + u[1] * v[0],
            (0, 2): np.sqrt(2) * u[1] * v[1],
        }
    return {k: a for k, a in amplitudes.items() if abs(a) > 1e-15}


class _KrausTable(BaseModel):
    """Все истории одного раунда: потери, фотоны, темновые отсчёты."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    patterns: list[tuple[int, int]]
    weights: np.ndarray
    ops: np.ndarray
    imperfect: np.ndarray


@lru_cache(maxsize=64)
def _kraus_table(params: ApparatusParams) -> _KrausTable:
    eta = params.eta
    patterns, weights, ops, imperfect = [], [], [], []
    for lost_a, lost_b in itertools.product((False, True), repeat=2):
        per_photons: dict[tuple[int, int], np.ndarray] = {}
        for j in range(4):
            bit_a, bit_b = j >> 1, j & 1
            factor = 1.0
            for bit, lost in ((bit_a, lost_a), (bit_b, lost_b)):
                if lost:
                    factor *= np.sqrt(1 - eta) if bit else 0.0
                else:
                    factor *= np.sqrt(eta) if bit else 1.0
            if factor == 0.0:
                continue
            emitted = _photon_amplitudes(bit_a == 1 and not lost_a, bit_b == 1 and not lost_b)
            for photons, amp in emitted.items():
                per_photons.setdefault(photons, np.zeros(4, dtype=complex))[j] = factor * amp
        for (n_l, n_r), op in per_photons.items():
            for dark_l, dark_r in itertools.product((0, 1), repeat=2):
                weight = 1.0
                for dark in (dark_l, dark_r):
                    weight *= params.dark_prob if dark else 1 - params.dark_prob
                if weight == 0.0:
                    continue
                clicks = [n_l + dark_l, n_r + dark_r]
                if not params.number_resolving:
                    clicks = [min(c, 1) for c in clicks]
                # ошибка неразличима протоколом: потеря, темновой отсчёт или два фотона на одном детекторе
                bunched = not params.number_resolving and (n_l > 1 or n_r > 1)
                patterns.append(tuple(clicks))
                weights.append(weight)
                ops.append(op)
                imperfect.append(lost_a or lost_b or bool(dark_l or dark_r) or bunched)
    return _KrausTable(
        patterns=patterns,
        weights=np.array(weights),
        ops=np.array(ops),
        imperfect=np.array(imperfect, dtype=bool),
    )


def success_rate_model(scheme: Scheme | str, eta: float) -> float:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if Scheme(scheme) == Scheme.TWO_PHOTON:
        return 0.5 * eta ** 2
    return 0.5 * eta


def is_single_click(pattern: tuple[int, int]) -> bool:
    return sum(pattern) == 1


def herald_phase(rounds: list[tuple[int, int]]) -> complex:
    """Фаза p для принятого геральда; в двухфотонной схеме p2 * conj(p1)."""
    phase = HERALD_PHASE[rounds[0]]
    if len(rounds) == 2:
        phase = HERALD_PHASE[rounds[1]] * np.conj(phase)
    return complex(phase)


def accepted_pattern(rounds: list[tuple[int, int]], params: ApparatusParams) -> bool:
    return len(rounds) == params.rounds and all(is_single_click(r) for r in rounds)


# ==========================================
# ПРОЕКЦИЯ ЧЁТНОСТИ
# ==========================================

def parity_project(state: sv.PureState, a: int, b: int, p: complex) -> tuple[sv.PureState, float]:
    """
    Применяет |10><10| + q|01><01| к паре (a, b), q = conj(p); a - левая метка.

    Возвращает нормированное состояние и квадрат нормы до нормировки.
    """
    q = np.conj(p)
    vec = sv.apply_diagonal(state, (a, b), [0.0, q, 1.0, 0.0])
    prob = float(np.vdot(vec, vec).real)
    if prob < sv.EXACT_TOL:
        raise ZeroNormProjectionError(f"qubits ({a}, {b}) have no odd-parity component")
    return sv.PureState(num_qubits=state.num_qubits, amplitudes=vec / np.sqrt(prob)), prob


def _flip_pair(vec: np.ndarray, n: int, left: int, right: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    return vec[idx ^ ((1 << left) | (1 << right))]


def _pair_index(n: int, left: int, right: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    return (((idx >> left) & 1) << 1) | ((idx >> right) & 1)


# ==========================================
# ПОПЫТКИ
# ==========================================

def prepared_input(state: sv.PureState | None, params: ApparatusParams) -> sv.PureState:
    """
    Начальное состояние эмиттеров для схемы.

    В схеме слабого возбуждения оба эмиттера готовятся в cos(t)|0> + sin(t)|1>
    с sin(t) = epsilon, переданное состояние не используется.
    """
    if params.scheme == Scheme.WEAK:
        eps = params.epsilon
        emitter = sv.single_qubit(np.sqrt(1 - eps ** 2), eps)
        return sv.kron_states(emitter, emitter)
    if state is None:
        return sv.init_plus(2)
    return state


def _sample_history(
    vec: np.ndarray,
    n: int,
    left: int,
    right: int,
    params: ApparatusParams,
    rng: np.random.Generator,
) -> tuple[list[tuple[int, int]], bool, np.ndarray]:
    table = _kraus_table(params)
    local = _pair_index(n, left, right)
    rounds, imperfect = [], False
    for round_index in range(params.rounds):
        pair_probs = np.bincount(local, weights=np.abs(vec) ** 2, minlength=4)
        probs = table.weights * (np.abs(table.ops) ** 2 @ pair_probs)
        cumulative = np.cumsum(probs)
        choice = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
        choice = min(choice, len(probs) - 1)
        vec = table.ops[choice][local] * vec
        vec = vec / np.linalg.norm(vec)
        pattern = table.patterns[choice]
        rounds.append(pattern)
        imperfect |= bool(table.imperfect[choice])
        if not is_single_click(pattern):
            break
        if round_index + 1 < params.rounds:
            vec = _flip_pair(vec, n, left, right)
    return rounds, imperfect, vec


def _record(rounds, imperfect, params, post_state) -> HeraldRecord:
    accepted = accepted_pattern(rounds, params)
    return HeraldRecord(
        clicks_left=sum(r[0] for r in rounds),
        clicks_right=sum(r[1] for r in rounds),
        rounds=rounds,
        accepted=accepted,
        projection_phase=herald_phase(rounds) if accepted else None,
        false_herald=accepted and imperfect,
        post_state=post_state,
    )


def ideal_attempt(
    state: sv.PureState,
    rng: np.random.Generator,
    left: int = 1,
    right: int = 0,
) -> HeraldRecord:
    """
    Идеальная попытка (eta = 1, без темновых отсчётов, счёт фотонов).

    Работает на любом регистре: эмиттерами служат кубиты left и right.
    Условное состояние остаётся чистым.
    """
    params = ApparatusParams.ideal()
    rounds, imperfect, vec = _sample_history(state.amplitudes, state.num_qubits, left, right, params, rng)
    post = sv.PureState(num_qubits=state.num_qubits, amplitudes=vec)
    return _record(rounds, imperfect, params, post)


def lossy_attempt(
    state: sv.PureState | None,
    params: ApparatusParams,
    rng: np.random.Generator,
    left: int = 1,
    right: int = 0,
) -> HeraldRecord:
    """Попытка с потерями и темновыми отсчётами; post_state - матрица плотности при данном геральде."""
    psi = prepared_input(state, params)
    rounds, imperfect, _ = _sample_history(psi.amplitudes, psi.num_qubits, left, right, params, rng)
    outcomes = enumerate_heralds(psi, params, left, right)
    rho = outcomes[tuple(rounds)]
    post = sv.density_from_matrix(rho, normalize=True)
    logger.debug("attempt rounds=%s imperfect=%s", rounds, imperfect)
    return _record(rounds, imperfect, params, post)


def sample_clicks(
    state: sv.PureState | None,
    params: ApparatusParams,
    rng: np.random.Generator,
) -> tuple[list[tuple[int, int]], bool, bool]:
    """Одна попытка без условного состояния: (раунды, принята, ложный геральд)."""
    psi = prepared_input(state, params)
    rounds, imperfect, _ = _sample_history(psi.amplitudes, psi.num_qubits, 1, 0, params, rng)
    accepted = accepted_pattern(rounds, params)
    return rounds, accepted, accepted and imperfect


def sample_patterns(
    state: sv.PureState | None,
    params: ApparatusParams,
    rng: np.random.Generator,
    attempts: int,
) -> dict[tuple[tuple[int, int], ...], int]:
    """Частоты картин щелчков по траекториям (без построения условных состояний)."""
    psi = prepared_input(state, params)
    counts: dict[tuple[tuple[int, int], ...], int] = {}
    for _ in range(attempts):
        rounds, _, _ = _sample_history(psi.amplitudes, psi.num_qubits, 1, 0, params, rng)
        counts[tuple(rounds)] = counts.get(tuple(rounds), 0) + 1
    return counts


# ==========================================
# ТОЧНЫЙ ПЕРЕБОР
# ==========================================

def enumerate_heralds(
    state: sv.PureState,
    params: ApparatusParams,
    left: int = 1,
    right: int = 0,
    imperfect_only: bool = False,
) -> dict[tuple[tuple[int, int], ...], np.ndarray]:
    """
    Ненормированные условные матрицы плотности для каждой последовательности
    картин щелчков; след - вероятность картины.
    """
    table = _kraus_table(params)
    n = state.num_qubits
    local = _pair_index(n, left, right)
    start = np.outer(state.amplitudes, state.amplitudes.conj())
    # ветви: (картины, rho, была ли ошибка)
    frontier = [((), start, False)]
    finished: dict[tuple[tuple[int, int], ...], np.ndarray] = {}
    for round_index in range(params.rounds):
        next_frontier = []
        for history, rho, imperfect in frontier:
            for pattern, weight, op, bad in zip(table.patterns, table.weights, table.ops, table.imperfect):
                m = op[local]
                new_rho = weight * (m[:, None] * rho * m.conj()[None, :])
                if np.trace(new_rho).real == 0.0:
                    continue
                key = history + (pattern,)
                flagged = imperfect or bool(bad)
                if is_single_click(pattern) and round_index + 1 < params.rounds:
                    flip = _flip_pair(np.arange(2 ** n), n, left, right)
                    next_frontier.append((key, new_rho[np.ix_(flip, flip)], flagged))
                    continue
                if imperfect_only and not flagged:
                    continue
                finished[key] = finished.get(key, 0) + new_rho
        frontier = _merge(next_frontier)
    return finished


def _merge(frontier):
    merged: dict = {}
    for key, rho, flagged in frontier:
        slot = (key, flagged)
        merged[slot] = merged.get(slot, 0) + rho
    return [(key, rho, flagged) for (key, flagged), rho in merged.items()]


def ideal_heralded_state(state: sv.PureState, rounds: list[tuple[int, int]], left: int = 1, right: int = 0) -> sv.PureState:
    """Эталон для принятой картины: проекции чётности раундов с переворотом X x X между ними."""
    current = state
    for round_index, pattern in enumerate(rounds):
        current, _ = parity_project(current, left, right, HERALD_PHASE[pattern])
        if round_index + 1 < len(rounds):
            flipped = _flip_pair(current.amplitudes, current.num_qubits, left, right)
            current = sv.PureState(num_qubits=current.num_qubits, amplitudes=flipped)
    return current


def pattern_key(rounds: Sequence[tuple[int, int]]) -> str:
    """Ключ картины щелчков: "l,r" по раундам через "|"."""
    return "|".join(f"{l},{r}" for l, r in rounds)


def heralded_performance(params: ApparatusParams, state: sv.PureState | None = None) -> HeraldedPerformance:
    """Точная вероятность успеха и средняя точность геральдированного состояния."""
    psi = prepared_input(state, params)
    outcomes = enumerate_heralds(psi, params)
    flawed = enumerate_heralds(psi, params, imperfect_only=True)
    click_table = {}
    success = weighted_fidelity = false_prob = 0.0
    for rounds, rho in sorted(outcomes.items()):
        prob = float(np.trace(rho).real)
        click_table[pattern_key(rounds)] = prob
        if not accepted_pattern(list(rounds), params):
            continue
        target = ideal_heralded_state(psi, list(rounds)).amplitudes
        success += prob
        weighted_fidelity += float(np.vdot(target, rho @ target).real)
        if rounds in flawed:
            false_prob += float(np.trace(flawed[rounds]).real)
    fidelity = weighted_fidelity / success if success > 0 else 0.0
    logger.debug("enumerated %d click patterns, success=%.3e fidelity=%.12f", len(click_table), success, fidelity)
    return HeraldedPerformance(
        success_prob=success,
        fidelity=fidelity,
        false_herald_prob=false_prob,
        click_table=click_table,
    )
