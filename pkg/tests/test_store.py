import pytest

import crud
from schemas import Experiment, RunRecordCreate, RunRecordResponse, TrialResultCreate
from scripts.run_service import ExperimentService
from scripts.scenario_loader import build_scenario


def make_record(experiment: Experiment = Experiment.GROW, digest: str = "a" * 64, seed: int = 1) -> RunRecordCreate:
    return RunRecordCreate(
        experiment=experiment,
        scenario_digest=digest,
        seed=seed,
        trials=2,
        aggregate={"mean_drift": 0.5},
        trial_results=[
            TrialResultCreate(trial_index=0, payload={"drift": 0.6}),
            TrialResultCreate(trial_index=1, payload={"drift": 0.4}),
        ],
    )


def test_record_is_stored_with_trials(session):
    created = crud.run_record.create_with_trials(session, make_record())
    loaded = crud.run_record.get_with_trials(session, created.id)
    assert loaded.experiment == "grow"
    assert loaded.aggregate == {"mean_drift": 0.5}
    assert [t.trial_index for t in loaded.trial_results] == [0, 1]
    assert loaded.trial_results[0].payload == {"drift": 0.6}


def test_history_queries(session):
    crud.run_record.create_with_trials(session, make_record())
    crud.run_record.create_with_trials(session, make_record(Experiment.PRUNE, "b" * 64))
    crud.run_record.create_with_trials(session, make_record(seed=2))

    newest_first = crud.run_record.get_multi(session)
    assert [r.seed for r in newest_first][0] == 2
    assert len(crud.run_record.get_multi(session, experiment="prune")) == 1
    assert len(crud.run_record.get_by_digest(session, "a" * 64)) == 2
    assert len(crud.run_record.get_by_digest(session, "a" * 64, seed=2)) == 1

    response = RunRecordResponse.model_validate(newest_first[0])
    assert response.experiment == Experiment.GROW


def test_remove_cascades_to_trials(session):
    created = crud.run_record.create_with_trials(session, make_record())
    crud.run_record.remove(session, created.id)
    assert crud.run_record.get(session, created.id) is None


def test_digest_must_be_sha256_length():
    with pytest.raises(ValueError):
        make_record(digest="short")


def test_service_runs_and_stores_budget(session):
    scenario = build_scenario({"experiment": "budget", "preset": "nv"})
    service = ExperimentService(session)
    record, outcome = service.run(scenario)
    assert record.passed is True
    assert record.aggregate == outcome.aggregate

    run_id = service.store(record)
    stored = crud.run_record.get(session, run_id)
    assert stored.aggregate["link"]["edge_time"] == pytest.approx(4e-3)
    assert stored.scenario_digest == record.scenario_digest


def test_store_needs_a_session():
    with pytest.raises(RuntimeError):
        ExperimentService().store(make_record())
