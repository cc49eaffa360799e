import csv
import json
import logging
import os
import time
from datetime import datetime
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from sqlalchemy.orm import Session

import crud
from engine import statevec as sv
from experiments import get_handler
from experiments.outcome import ExperimentOutcome
from schemas import RunRecordCreate, Scenario, TrialResultCreate
from scripts.scenario_loader import scenario_digest

load_dotenv()

LOG_DIR = os.getenv("LOG_DIR", "logs")

logger = logging.getLogger("run_service")


def configure_run_logging(log_dir: str = LOG_DIR, level: int = logging.INFO) -> str:
    """
    Файл logs/run_<дата>.log плюс консоль; старые обработчики снимаются.
    Возвращает путь к файлу журнала.
    """
    if not os.path.exists(log_dir):
        os.makedirs(log_dir)

    current_date = datetime.now().strftime("%Y-%m-%d")
    log_filename = os.path.join(log_dir, f"run_{current_date}.log")

    root = logging.getLogger()
    root.setLevel(level)
    if root.hasHandlers():
        root.handlers.clear()

    formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')
    file_handler = logging.FileHandler(log_filename, encoding='utf-8')
    file_handler.setFormatter(formatter)
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    root.addHandler(file_handler)
    root.addHandler(console_handler)

    logger.info("=" * 50)
    logger.info(f"НОВАЯ СЕССИЯ ЗАПУСКОВ: {datetime.now().strftime('%H:%M:%S')}")
    logger.info("=" * 50)
    return log_filename


class ExperimentService:
    """Запуск сценария: обработчик, запись результата, сохранение."""

    def __init__(self, db: Optional[Session] = None):
        self.db = db

    def run(
        self,
        scenario: Scenario,
        traces: bool = False,
        dump_state: bool = False,
    ) -> tuple[RunRecordCreate, ExperimentOutcome]:
        handler = get_handler(scenario)
        logger.info(f"Запуск {scenario.experiment.value}: seed={scenario.seed}, trials={scenario.trials}")
        started = time.perf_counter()
        outcome = handler(scenario, traces=traces, dump_state=dump_state)
        wall_clock = time.perf_counter() - started

        record = RunRecordCreate(
            experiment=scenario.experiment,
            scenario_digest=scenario_digest(scenario),
            seed=scenario.seed,
            trials=scenario.trials,
            model_time_s=outcome.model_time_s,
            wall_clock_s=wall_clock,
            aggregate=outcome.aggregate,
            trial_results=[
                TrialResultCreate(trial_index=i, payload=payload)
                for i, payload in enumerate(outcome.trial_payloads)
            ],
        )
        logger.info(f"Готово за {wall_clock:.2f} с, модельное время {outcome.model_time_s:.3e} с")
        return record, outcome

    def store(self, record: RunRecordCreate) -> int:
        """Сохраняет запись запуска; при ошибке транзакция откатывается."""
        if self.db is None:
            raise RuntimeError("no database session to store the run record")
        try:
            db_obj = crud.run_record.create_with_trials(self.db, record)
        except Exception as e:
            self.db.rollback()
            logger.error(f"Ошибка сохранения запуска: {e}")
            raise
        logger.info(f"Запуск сохранён: id={db_obj.id}, испытаний {len(record.trial_results)}")
        return db_obj.id


# ==========================================
# ВЫВОД
# ==========================================

def output_stem(record: RunRecordCreate) -> str:
    return f"{record.experiment.value}_{record.scenario_digest[:12]}_{record.seed}"


def record_json(record: RunRecordCreate, include_wall_clock: bool = True) -> str:
    exclude = None if include_wall_clock else {"wall_clock_s"}
    data = record.model_dump(mode="json", exclude=exclude)
    return json.dumps(data, indent=2, sort_keys=True)


def _csv_rows(record: RunRecordCreate, outcome: ExperimentOutcome) -> list[dict]:
    if outcome.traces:
        return outcome.traces
    rows = []
    for trial in record.trial_results:
        row = {"trial": trial.trial_index}
        row.update({k: v if not isinstance(v, (list, dict)) else json.dumps(v) for k, v in trial.payload.items()})
        rows.append(row)
    return rows


def write_outputs(
    record: RunRecordCreate,
    outcome: ExperimentOutcome,
    out_dir: Path | str,
    fmt: str = "json",
    dump_state: bool = False,
) -> list[Path]:
    """JSON всегда; CSV трасс по запросу; состояние - если обработчик его вернул."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = output_stem(record)
    written = []

    json_path = out_dir / f"{stem}.json"
    json_path.write_text(record_json(record), encoding="utf-8")
    written.append(json_path)

    if fmt == "csv":
        rows = _csv_rows(record, outcome)
        csv_path = out_dir / f"{stem}.csv"
        fields = list(dict.fromkeys(k for row in rows for k in row))
        with open(csv_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=fields)
            writer.writeheader()
            writer.writerows(rows)
        written.append(csv_path)

    if dump_state:
        if outcome.final_state is None:
            logger.warning("Эксперимент не вернул чистого состояния, --dump-state пропущен")
        else:
            state_path = out_dir / f"{stem}_state.json"
            state_path.write_text(sv.dump_state(outcome.final_state), encoding="utf-8")
            written.append(state_path)

    for path in written:
        logger.info(f"Записан файл {path}")
    return written
