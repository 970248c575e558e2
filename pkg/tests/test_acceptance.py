"""Acceptance gate: every criterion at its stated tolerance.

Each test prints its one-line pass/fail verdict (visible with pytest -s
or in captured output on failure) and asserts the criterion held.  The
checks come from kitaevsim.validation, the same code the ``validate``
CLI subcommand runs.
"""

import pytest

from kitaevsim import validation


def _run(check_fn, **kwargs):
    result = check_fn(**kwargs)
    print(result.line())
    assert result.passed, result.line()


def test_criterion_01_manifold_counting():
    _run(validation.check_manifold_counting)


def test_criterion_02_plaquette_algebra():
    _run(validation.check_plaquette_algebra)


def test_criterion_03_closed_form_vs_quadrature():
    _run(validation.check_closed_form_vs_quadrature)


def test_criterion_04_tdpt_scaling():
    _run(validation.check_tdpt_scaling)


def test_criterion_05_phase_law_and_stability():
    _run(validation.check_phase_law)


def test_criterion_06_density_matrix_structure():
    _run(validation.check_density_structure)


def test_criterion_07_entanglement_entropy():
    _run(validation.check_entropy)


def test_criterion_08_thermal_mixing():
    _run(validation.check_thermal)


def test_criterion_09_correlation_engines():
    _run(validation.check_correlation)


def test_criterion_10_oracle_quality():
    _run(validation.check_oracle_quality)


def test_full_suite_summary():
    results = validation.run_acceptance()
    for r in results:
        print(r.line())
    assert len(results) == 10
    assert all(r.passed for r in results)
