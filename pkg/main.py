import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

import crud
from db import database
from exceptions import ScenarioError, SimulatorError
from schemas import Experiment, RunRecordResponse
from scripts import trial_pool
from scripts.presets import PRESETS
from scripts.run_service import LOG_DIR, ExperimentService, configure_run_logging, write_outputs
from scripts.scenario_loader import build_scenario, load_scenario

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VERIFY_FAILED = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinnet", description="Spin-network graph-state and MBQC simulator")
    parser.add_argument("--log-dir", default=None, help="каталог журналов (по умолчанию LOG_DIR или logs)")
    parser.add_argument("-v", "--verbose", action="store_true", help="подробный журнал (DEBUG)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_options(p: argparse.ArgumentParser, scenario_required: bool) -> None:
        p.add_argument("--scenario", type=Path, required=scenario_required, help="файл сценария key = value")
        p.add_argument("--seed", type=int, default=None, help="главный сид (перекрывает сценарий)")
        p.add_argument("--trials", type=int, default=None, help="число испытаний (перекрывает сценарий)")
        p.add_argument("--out", type=Path, default=None, help="каталог для JSON/CSV результатов")
        p.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
        p.add_argument("--dump-state", action="store_true", help="сохранить итоговое чистое состояние")
        p.add_argument("--store", action="store_true", help="записать запуск в базу данных")

    run = sub.add_parser("run", help="запустить эксперимент из сценария")
    add_run_options(run, scenario_required=True)

    verify = sub.add_parser("verify", help="сверка бэкендов с эталонами")
    add_run_options(verify, scenario_required=False)
    verify.add_argument("--suite", default=None, help="all или список через запятую: graph,pattern,growth,erasure")
    verify.add_argument("--inject-failure", action="store_true", help="добавить заведомо ложную проверку")

    budget = sub.add_parser("budget", help="аппаратный бюджет связи")
    add_run_options(budget, scenario_required=False)
    budget.add_argument("--preset", choices=sorted(PRESETS), default=None)

    history = sub.add_parser("history", help="последние сохранённые запуски")
    history.add_argument("--experiment", choices=[e.value for e in Experiment], default=None)
    history.add_argument("--digest", default=None, help="только запуски с этим дайджестом сценария")
    history.add_argument("--limit", type=int, default=20)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    values = {"seed": args.seed, "trials": args.trials}
    if getattr(args, "suite", None) is not None:
        values["suite"] = args.suite
    if getattr(args, "inject_failure", False):
        values["inject_failure"] = True
    return values


def _scenario_for(args: argparse.Namespace, experiment: Optional[Experiment] = None):
    overrides = _overrides(args)
    if args.scenario is not None:
        scenario = load_scenario(args.scenario, overrides)
        if experiment is not None and scenario.experiment != experiment:
            raise ScenarioError(
                f"'{args.command}' needs experiment = {experiment.value}, scenario has {scenario.experiment.value}",
                field="experiment",
            )
        return scenario
    values = {"experiment": experiment.value}
    if getattr(args, "preset", None):
        values["preset"] = args.preset
    return build_scenario(values, overrides=overrides)


def _execute(args: argparse.Namespace, experiment: Optional[Experiment] = None) -> int:
    scenario = _scenario_for(args, experiment)
    traces = args.fmt == "csv"

    if args.store:
        database.create_all()
        with database.get_session() as db:
            service = ExperimentService(db)
            record, outcome = service.run(scenario, traces=traces, dump_state=args.dump_state)
            service.store(record)
    else:
        record, outcome = ExperimentService().run(scenario, traces=traces, dump_state=args.dump_state)

    if args.out is not None:
        write_outputs(record, outcome, args.out, fmt=args.fmt, dump_state=args.dump_state)
    else:
        print(json.dumps(record.model_dump(mode="json", exclude={"trial_results"}), indent=2, sort_keys=True))
        if args.dump_state:
            logger.warning("--dump-state needs --out, state not written")

    # код 2 - только для проверки; бюджет сообщает passed, но не падает
    if record.passed is False and record.experiment == Experiment.VERIFY:
        logger.error(f"Проверка не прошла: {', '.join(record.aggregate.get('failures', []))}")
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def _history(args: argparse.Namespace) -> int:
    database.create_all()
    with database.get_session() as db:
        if args.digest:
            records = crud.run_record.get_by_digest(db, args.digest)[-args.limit:]
        else:
            records = crud.run_record.get_multi(db, limit=args.limit, experiment=args.experiment)
        for r in records:
            print(RunRecordResponse.model_validate(r).model_dump_json())
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_run_logging(args.log_dir or LOG_DIR, logging.DEBUG if args.verbose else logging.INFO)

    try:
        if args.command == "history":
            return _history(args)
        if args.command == "verify":
            return _execute(args, Experiment.VERIFY)
        if args.command == "budget":
            return _execute(args, Experiment.BUDGET)
        return _execute(args)
    except (ScenarioError, ValidationError) as e:
        logger.error(f"Ошибка конфигурации: {e}")
        return EXIT_CONFIG
    except (SimulatorError, ValueError) as e:
        logger.error(f"Ошибка симуляции: {e}")
        return EXIT_CONFIG
    except KeyboardInterrupt:
        trial_pool.request_stop()
        logger.warning("Прервано пользователем")
        return 130


if __name__ == "__main__":
    sys.exit(main())
