"""Acceptance suite at the desk scale.

Default configuration: momentum grid p in +-(0.5, 12) with n = 2048 per
half-line, time window (-6, 2) with m = 4096, reference packet
(p0, sigma_p, x0) = (4, 0.25, -8), interval X = (-3, -1], seed 1729.
Each criterion prints one PASS/FAIL line (run with `pytest -s` to see
them as they execute).
"""

import math

import numpy as np
import pytest

import chronos
from chronos import clock, operators, verify

P_MIN, P_MAX, N = 0.5, 12.0, 2048
T_MIN, T_MAX, M = -6.0, 2.0, 4096
SEED = 1729
REF_SPEC = chronos.GaussianStateSpec(4.0, 0.25, -8.0)
INTERVAL = chronos.Interval(-3.0, -1.0)


@pytest.fixture(scope="module")
def grid():
    return chronos.make_grid(P_MIN, P_MAX, N)


@pytest.fixture(scope="module")
def tg():
    return chronos.make_time_grid(T_MIN, T_MAX, M)


@pytest.fixture(scope="module")
def phi(grid):
    return chronos.gaussian_state(REF_SPEC, grid)


@pytest.fixture(scope="module")
def transform(grid, tg):
    return clock.AmplitudeTransform(grid, tg)


@pytest.fixture(scope="module")
def matrix_grid():
    return chronos.make_grid(P_MIN, P_MAX, 512)


@pytest.fixture(scope="module")
def element512(matrix_grid):
    return chronos.povm_element(INTERVAL, matrix_grid)


def conclude(tag, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} {tag}: {detail}")
    assert ok, f"{tag}: {detail}"


def test_criterion_1_normalization(grid, phi, transform):
    dist = clock.distribution_from_amplitudes(transform.amplitudes(phi))
    gap = abs(dist.total_mass - 1.0)
    errors = []
    for m in (16, 32):
        d = chronos.time_distribution(phi, chronos.make_time_grid(T_MIN, T_MAX, m))
        errors.append(abs(d.total_mass - 1.0))
    ratio = errors[0] / errors[1]
    conclude(
        "criterion 1 (normalization)",
        gap < 1e-4 and ratio >= 4.0,
        f"|mass - 1| = {gap:.3e} (tol 1e-4); m-doubling 16->32 shrinks the error "
        f"{ratio:.1f}x (required >= 4x)",
    )


def test_criterion_2_covariance(phi, tg):
    scan = verify.covariance_scan(phi, range(-64, 65), tg)
    worst = max(err for _, err in scan)
    conclude(
        "criterion 2 (covariance)",
        worst < 1e-8,
        f"max density discrepancy over 129 shifts k in [-64, 64]: {worst:.3e} (tol 1e-8)",
    )


def test_criterion_3_pauli_positivity(matrix_grid, element512):
    min_eig = float(element512.eigenvalues()[0])
    forms = [
        chronos.interval_probability(chronos.gaussian_state(spec, matrix_grid), INTERVAL)
        for spec in verify.random_admissible_specs(matrix_grid, 100, seed=SEED)
    ]
    min_form = min(forms)
    conclude(
        "criterion 3 (Pauli positivity)",
        min_eig >= -1e-10 and min_form > 0.0,
        f"min eigenvalue of the {element512.entries.shape[0]}x{element512.entries.shape[0]} "
        f"element = {min_eig:.3e} (>= -1e-10); min <phi|tau(X)|phi> over 100 seeded "
        f"states = {min_form:.3e} (> 0)",
    )


def test_criterion_4_non_projectivity(element512):
    mu = element512.eigenvalues()
    defect = float(np.max(mu * (1.0 - mu)))
    conclude(
        "criterion 4 (non-projectivity)",
        defect > 0.05,
        f"max mu(1-mu) over the spectrum of tau((-3,-1]) = {defect:.4f} (required > 0.05)",
    )


def test_criterion_5_commutator(phi):
    residual = operators.commutator_residual(phi)
    fine_grid = chronos.make_grid(P_MIN, P_MAX, 2 * N)
    fine = operators.commutator_residual(chronos.gaussian_state(REF_SPEC, fine_grid))
    ratio = residual / fine
    conclude(
        "criterion 5 (commutator)",
        residual < 1e-3 and ratio >= 8.0,
        f"interior residual |(HT-TH)phi + i phi| = {residual:.3e} (tol 1e-3); "
        f"n-doubling shrinks it {ratio:.1f}x (required >= 8x)",
    )


def test_criterion_6_moment_identities(phi, tg, transform):
    rows = {r.name: r for r in verify.check_moments(phi, tg, transform=transform)}
    first = rows["moment_first_gap"]
    second = rows["moment_second_rel_gap"]
    lam = rows["moment_lambda_rel_gap"]
    ok = first.passed and second.passed and lam.passed
    conclude(
        "criterion 6 (moment identities)",
        ok,
        f"|<T>_op - mean| = {abs(first.value):.3e}, second-moment rel gap = "
        f"{abs(second.value):.3e}, Lambda rel gap = {abs(lam.value):.3e} (each < 1e-3)",
    )


def test_criterion_7_uncertainty(grid, phi):
    products = [
        operators.uncertainty_product(chronos.gaussian_state(spec, grid))
        for spec in verify.random_admissible_specs(grid, 50, seed=SEED)
    ]
    low = min(products)
    _, sigma_h = operators.energy_moments(phi)
    sigma_gap = abs(sigma_h - 1.0010)
    exact_gap = abs(sigma_h - verify.sigma_h_closed_form(REF_SPEC))
    conclude(
        "criterion 7 (uncertainty relation)",
        low >= 0.4995 and sigma_gap < 1e-3 and exact_gap < 1e-3,
        f"min sigma_T sigma_H over 50 seeded states = {low:.6f} (>= 0.4995); "
        f"|sigma_H - 1.0010| = {sigma_gap:.2e} (< 1e-3)",
    )


def test_criterion_8_gram_kernel():
    worst_imag, worst_real, worst_cross = 0.0, 0.0, 0.0
    for sep in (0.5, 1.0, 2.0):
        rows = {
            r.name.split("[")[0]: r for r in verify.check_gram_kernel(sep, 0.0)
        }
        worst_imag = max(worst_imag, abs(rows["gram_imag_rel_gap"].value))
        worst_real = max(worst_real, abs(rows["gram_real_fraction"].value))
        worst_cross = max(worst_cross, abs(rows["gram_cross_branch"].value))
    conclude(
        "criterion 8 (overlap kernel)",
        worst_imag < 0.05 and worst_real < 0.10 and worst_cross < 1e-12,
        f"extrapolated imag vs 1/(2 pi dt): worst rel gap {worst_imag:.2e} (< 5%); "
        f"real/imag {worst_real:.2e} (< 10%); cross-branch {worst_cross:.1e} (< 1e-12)",
    )


def test_criterion_9_two_path_consistency(matrix_grid):
    rng = np.random.default_rng(SEED)
    specs = verify.random_admissible_specs(matrix_grid, 10, seed=SEED + 1)
    worst = 0.0
    for spec in specs:
        a = rng.uniform(-5.0, 0.0)
        x = chronos.Interval(a, a + rng.uniform(0.5, 3.0))
        state = chronos.gaussian_state(spec, matrix_grid)
        element = chronos.povm_element(x, matrix_grid)
        c = np.sqrt(matrix_grid.weights) * state.values
        matrix_path = float(np.vdot(c, element.entries @ c).real)
        density_path = chronos.interval_probability(state, x)
        worst = max(worst, abs(matrix_path - density_path))
    conclude(
        "criterion 9 (measure-element consistency)",
        worst < 1e-6,
        f"max |<phi|tau(X)|phi> - integral_X rho dt| over 10 seeded intervals/states = "
        f"{worst:.3e} (tol 1e-6)",
    )
