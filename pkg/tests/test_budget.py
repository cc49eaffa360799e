import math

import numpy as np
import pytest

from engine.budget import (
    DEFAULT_FAULT_BUDGET,
    QD_ROUNDING_NOTE,
    CavityParams,
    SpinTimes,
    link_budget,
    purcell,
    t2_compose,
)
from scripts.presets import preset_note, preset_values


def test_purcell_factor():
    cavity = CavityParams(q_factor=1e4, mode_volume=1.0, refractive_index=2.4)
    assert purcell(cavity) == pytest.approx(54.97, abs=0.01)
    doubled = CavityParams(q_factor=2e4, mode_volume=1.0, refractive_index=2.4)
    assert purcell(doubled) == pytest.approx(2 * purcell(cavity), rel=1e-12)
    larger = CavityParams(q_factor=1e4, mode_volume=3.0, refractive_index=2.4)
    assert purcell(larger) == pytest.approx(purcell(cavity) / 3, rel=1e-12)


def test_purcell_rejects_nonpositive_input():
    with pytest.raises(ValueError):
        CavityParams(q_factor=0, refractive_index=2.4)


def test_t2_composition():
    assert t2_compose(1e-3) == pytest.approx(2e-3, rel=1e-9)
    assert t2_compose(math.inf, 1e-6) == pytest.approx(1e-6, rel=1e-9)
    assert t2_compose(1e-3, 2e-3) == pytest.approx(1e-3, rel=1e-9)
    with pytest.raises(ValueError):
        t2_compose(-1.0)


def test_t2_never_exceeds_twice_t1(rng):
    for t1, pdp in rng.uniform(1e-9, 1.0, size=(200, 2)):
        assert SpinTimes(t1=t1, t2_pdp=pdp).t2 <= 2 * t1


def test_nv_budget():
    budget = link_budget(**preset_values("nv"))
    assert budget.p_success == pytest.approx(5e-5)
    assert budget.edge_time == pytest.approx(4e-3, rel=1e-12)
    assert budget.edges_per_coherence == pytest.approx(250.0)
    assert budget.fault_budget == DEFAULT_FAULT_BUDGET
    assert budget.within_fault_budget


def test_qd_budget_carries_rounding_note():
    budget = link_budget(**preset_values("qd"), note=preset_note("qd"))
    assert budget.edge_time == pytest.approx(8e-9, rel=1e-12)
    assert budget.note == QD_ROUNDING_NOTE
    assert budget.decoherence_per_edge == pytest.approx(8e-3)
    assert budget.within_fault_budget


def test_trivial_budget():
    budget = link_budget(attempt_time=1.0, eta=1.0, scheme="weak", client_t2=100.0)
    assert budget.edge_time == pytest.approx(2.0)
    assert np.isclose(budget.decoherence_per_edge, 0.02)


def test_zero_efficiency_has_no_budget():
    with pytest.raises(ValueError):
        link_budget(attempt_time=1.0, eta=0.0, scheme="two_photon", client_t2=1.0)


def test_report_serializes_derived_fields():
    data = link_budget(**preset_values("nv")).model_dump(mode="json")
    for key in ("edge_time", "edges_per_coherence", "decoherence_per_edge", "within_fault_budget"):
        assert key in data
