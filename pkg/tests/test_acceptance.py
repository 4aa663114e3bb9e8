"""The acceptance battery, one test per criterion.

Each test prints the criterion's pass/fail line, so ``pytest -s`` shows the
same report as ``metabar suite``.
"""

import pytest

from metabar.suite import CRITERIA, run_suite

SEED = 0


@pytest.fixture(scope="session")
def report():
    return run_suite(SEED)


def _check(report, number):
    res = next(r for r in report.results if r.number == number)
    print(res.line())
    assert res.ok, f"{res.detail} (witness {res.witness!r})"


def test_criterion_01_metagroup_axioms(report):
    _check(report, 1)


def test_criterion_02_framing_reduction(report):
    _check(report, 2)


def test_criterion_03_dd_zero(report):
    _check(report, 3)


def test_criterion_04_homotopy_identity(report):
    _check(report, 4)


def test_criterion_05_acyclicity(report):
    _check(report, 5)


def test_criterion_06_classical_bar_oracle(report):
    _check(report, 6)


def test_criterion_07_resolution_identities(report):
    _check(report, 7)


def test_criterion_08_homotopy_calculus(report):
    _check(report, 8)


def test_criterion_09_splitting(report):
    _check(report, 9)


def test_criterion_10_long_exact_sequence(report):
    _check(report, 10)


def test_criterion_11_tensor(report):
    _check(report, 11)


def test_criterion_12_determinism(report):
    _check(report, 12)
    # and a second full run of every criterion reproduces the report byte for byte
    again = run_suite(SEED)
    same = again.to_json() == report.to_json() and again.to_text() == report.to_text()
    print(f"[{'PASS' if same else 'FAIL'}] 12 full-report rerun identical: {same}")
    assert same


def test_every_criterion_is_covered(report):
    assert [r.number for r in report.results] == sorted(CRITERIA) == list(range(1, 13))
