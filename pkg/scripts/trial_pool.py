import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, TypeVar

import numpy as np
from dotenv import load_dotenv

from dependencies import trial_rng

load_dotenv()

logger = logging.getLogger("trial_pool")

MAX_WORKERS = int(os.getenv("MAX_WORKERS", "4"))

# === ГЛОБАЛЬНЫЕ ФЛАГИ ДЛЯ УПРАВЛЕНИЯ ===
IS_POOL_RUNNING = False
STOP_POOL_FLAG = False

T = TypeVar("T")


def request_stop() -> None:
    """Новые испытания больше не выдаются; уже запущенные дорабатывают."""
    global STOP_POOL_FLAG
    STOP_POOL_FLAG = True
    logger.warning("Получен сигнал остановки пула испытаний")


def run_trials(
    fn: Callable[[int, np.random.Generator], T],
    master_seed: int,
    trials: int,
    workers: Optional[int] = None,
) -> list[T]:
    """
    Запускает fn(trial_index, rng) для каждого испытания.

    Генератор испытания выводится из (master_seed, trial_index), а результаты
    возвращаются в порядке индексов, поэтому итог не зависит от числа потоков.
    """
    global IS_POOL_RUNNING, STOP_POOL_FLAG

    if IS_POOL_RUNNING:
        raise RuntimeError("trial pool is already running")
    IS_POOL_RUNNING = True
    STOP_POOL_FLAG = False
    workers = workers or MAX_WORKERS

    def task(index: int) -> Optional[T]:
        if STOP_POOL_FLAG:
            return None
        return fn(index, trial_rng(master_seed, index))

    try:
        if workers == 1 or trials == 1:
            results = [task(i) for i in range(trials)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(task, range(trials)))
    finally:
        IS_POOL_RUNNING = False

    if STOP_POOL_FLAG:
        done = [r for r in results if r is not None]
        logger.warning(f"Пул остановлен: выполнено {len(done)} из {trials} испытаний")
        STOP_POOL_FLAG = False
        return done
    logger.debug(f"Выполнено {trials} испытаний в {workers} потоках")
    return results
