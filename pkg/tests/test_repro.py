"""Every bundled experiment must pass its own internal checks."""

import pytest

from drfeas.repro import EXPERIMENTS, run_experiment, sphere_halfspace


@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
def test_experiment_passes(name):
    result = run_experiment(name)
    failed = [k for k, v in result.details.items() if v is False]
    assert result.passed, f"{name}: failed checks {failed}"


def test_unknown_experiment_raises():
    with pytest.raises(KeyError):
        run_experiment("does-not-exist")


def test_slab_records_observed_period():
    result = run_experiment("fig5-slab")
    assert result.passed
    assert result.details.get("observed_period", 0) >= 2


@pytest.mark.parametrize("b", [0.0, -0.5, -0.9, -1.0])
def test_sphere_family_over_offsets(b):
    result = sphere_halfspace(b)
    assert result.passed, result.details


def test_sphere_rejects_offsets_outside_range():
    with pytest.raises(ValueError):
        sphere_halfspace(1.0)
    with pytest.raises(ValueError):
        sphere_halfspace(-1.5)
