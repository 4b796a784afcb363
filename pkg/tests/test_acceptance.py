"""Acceptance suite: one test (and one printed verdict line) per criterion.

These run the full budgets from :mod:`qemcmc.validation`; the reduced versions
of the same checks back the CLI ``validate`` experiment.

Two criteria are known to fail and are kept at their pinned tolerances rather
than loosened:

* Criterion 2 (simulated grover chain gap vs the closed form, rel <= 1e-8 on
  random draws).  The closed form describes the two-level invariant block;
  near zeros of the unmarked proposal probability at beta = 1, the unmarked
  bulk eigenvalue crosses above the two-level one and becomes the true gap.
  Separately, draws whose closed-form gap is below ~1e-8 of the matrix scale
  exceed float64 eigensolver resolution.  Every scanned draw seed hits at
  least one of the two corners.
* Criterion 5b (off-resonance scaling slope -2 +/- 0.1).  The gap carries an
  oscillatory sin^2 factor whose sample over N = 10..20 biases the fitted
  slope to about -1.72; the 4^-N envelope itself fits -2.0001.
"""

import pytest

from qemcmc import cli, validation


def _report(result):
    verdict = "PASS" if result.passed else "FAIL"
    print(f"[{result.criterion}] {verdict}: value={result.value:.6g} "
          f"tolerance={result.tolerance:.6g} {result.detail}".rstrip())
    return result


@pytest.fixture(scope="module")
def grover_sweep():
    # criteria 2 and 3 share one randomized sweep
    return validation.check_grover_closed_form()


def test_criterion_01_uniform_closed_form():
    result = _report(validation.check_uniform_closed_form())
    assert result.passed, f"worst relative error {result.value}"


def test_criterion_02_grover_closed_form(grover_sweep):
    result = _report(grover_sweep[0])
    assert result.passed, f"worst relative error {result.value}"


def test_criterion_03_marked_bound_saturation(grover_sweep):
    result = _report(grover_sweep[1])
    assert result.passed, f"worst relative error {result.value}"


def test_criterion_04_bound_direction():
    result = _report(validation.check_bound_direction())
    assert result.passed, f"worst gap-minus-bound margin {result.value}"


def test_criterion_05a_resonance_scaling():
    result = _report(validation.check_scaling_resonance())
    assert result.passed, f"slope {result.value}, expected -1 +/- 0.1"


def test_criterion_05b_off_resonance_scaling():
    result = _report(validation.check_scaling_off_resonance())
    assert result.passed, f"slope {result.value}, expected -2 +/- 0.1"


def test_criterion_06_transverse_no_speedup():
    result = _report(validation.check_transverse_slope())
    assert result.passed, f"slope {result.value}, expected >= -1.2"


def test_criterion_07_mixing_sandwich():
    result = _report(validation.check_mixing_sandwich())
    assert result.passed, f"worst sandwich margin {result.value}"


def test_criterion_08_propagator_fidelity():
    result = _report(validation.check_propagator())
    assert result.passed, f"worst fidelity error {result.value}"


def test_criterion_09_structural_invariants():
    result = _report(validation.check_structural_invariants())
    assert result.passed, f"worst normalized deviation {result.value}"


def test_criterion_10_figure_reproduction():
    argv_a = ["--experiment", "figure-a", "--n-min", "10", "--n-max", "20",
              "--beta", "5", "--seed", "1"]
    argv_b = ["--experiment", "figure-b", "--n-min", "10", "--n-max", "20",
              "--beta", "5", "--seed", "1"]
    outputs = {}
    for name, argv in (("figure-a", argv_a), ("figure-b", argv_b)):
        first, status1 = cli.run(cli.build_config(argv))
        second, status2 = cli.run(cli.build_config(argv))
        assert status1 == 0 and status2 == 0
        assert first == second, f"{name} not byte-reproducible"
        outputs[name] = first
    rows = [line.split(",") for line in
            outputs["figure-b"].strip().split("\n")[1:]]
    bound = {r[1]: float(r[7]) for r in rows if r[6] == "bound"}
    exact = {r[1]: float(r[7]) for r in rows if r[6] == "delta_exact"}
    assert exact, "no paired exact rows produced"
    violation = max(exact[n] - bound[n] for n in exact)
    result = _report(validation.CriterionResult(
        "figure-reproduction", violation, 1e-12, violation <= 1e-12,
        detail=f"{len(exact)} paired rows"))
    assert result.passed
