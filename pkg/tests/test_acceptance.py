"""Acceptance gate: every criterion evaluated at its stated tolerance.

Each test prints one PASS/FAIL line (plus the measured values) straight to
the terminal, then asserts the verdict.  Set ``FRACLOD_ACCEPT_K5=1`` to add
the K=5 column to the localized rate check.
"""

import pytest

from fraclod import acceptance


@pytest.fixture(scope="module")
def ctx():
    return acceptance.Context()


def _gate(number, ctx, capsys):
    result = acceptance.CRITERIA[number](ctx)
    with capsys.disabled():
        print("\n" + result.report(), flush=True)
    assert result.passed, result.line()


def test_criterion_1_localized_convergence_rates(ctx, capsys):
    _gate(1, ctx, capsys)


def test_criterion_2_stopping_indices(ctx, capsys):
    _gate(2, ctx, capsys)


def test_criterion_3_geological_convergence_rates(ctx, capsys):
    _gate(3, ctx, capsys)


def test_criterion_4_projection_properties(ctx, capsys):
    _gate(4, ctx, capsys)


def test_criterion_5_lod_kernel_and_decay(ctx, capsys):
    _gate(5, ctx, capsys)


def test_criterion_6_solver_consistency(ctx, capsys):
    _gate(6, ctx, capsys)


def test_criterion_7_structural_invariants(ctx, capsys):
    _gate(7, ctx, capsys)
