"""Brute-force verification of the observable's identities.

Every check here recomputes its target quantity independently of the
path it validates: kernel overlaps are integrated from eigenfunction
values on an extended energy grid, covariance compares two densities
computed from scratch, and the operator/measure moment identities pit
the finite-difference operators against time quadrature.  Principal
values are regularized by Gaussian damping exp(-eps p^2) (that is,
exp(-2 eps E)) and removed by two-point linear extrapolation eps -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from . import clock, operators
from .errors import ParameterError, TruncationError
from .hilbert import (
    GaussianStateSpec,
    MomentumGrid,
    WaveFunction,
    evolve,
    gaussian_state,
    make_grid,
)

TWO_PI = 2.0 * math.pi

DEFAULT_EPSILONS = (2e-3, 1e-3)
# Sampling box for random admissible states.  The admissibility margin is
# held at 9 sigma (not the 6 sigma floor gaussian_state enforces) so every
# sampled state also satisfies the <1e-8 inner-edge amplitude bound.
P0_RANGE = (2.0, 8.0)
SIGMA_RANGE = (0.1, 0.6)
X0_RANGE = (-10.0, 10.0)
SUITE_MARGIN = 9.0


@dataclass(frozen=True)
class CheckResult:
    """One named verification row.

    Two-sided rows pass iff |value| <= tolerance; one-sided rows pass iff
    value >= -tolerance and say so in their context.
    """

    name: str
    value: float
    tolerance: float
    passed: bool
    context: str


def two_sided(name: str, value: float, tolerance: float, context: str = "") -> CheckResult:
    value = float(value)
    return CheckResult(name, value, tolerance, abs(value) <= tolerance, context)


def one_sided(name: str, value: float, tolerance: float, context: str = "") -> CheckResult:
    value = float(value)
    note = "one-sided: pass iff value >= -tolerance"
    full = f"{note}; {context}" if context else note
    return CheckResult(name, value, tolerance, value >= -tolerance, full)


@dataclass
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, result) -> None:
        if isinstance(result, CheckResult):
            self.checks.append(result)
        else:
            self.checks.extend(result)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "checks": [
                {
                    "name": c.name,
                    "value": c.value,
                    "tolerance": c.tolerance,
                    "passed": c.passed,
                    "context": c.context,
                }
                for c in self.checks
            ],
        }


def random_admissible_specs(
    grid: MomentumGrid,
    count: int,
    seed: int,
    margin: float = SUITE_MARGIN,
) -> list[GaussianStateSpec]:
    """Seeded admissible Gaussian specs: |p0| uniform in [2, 8] with either
    sign, sigma_p in [0.1, 0.6], x0 in [-10, 10], rejection-sampled until
    (|p0| - p_min)/sigma_p >= margin."""
    rng = np.random.default_rng(seed)
    specs = []
    while len(specs) < count:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        p0 = sign * rng.uniform(*P0_RANGE)
        sigma_p = rng.uniform(*SIGMA_RANGE)
        x0 = rng.uniform(*X0_RANGE)
        if (abs(p0) - grid.p_min) / sigma_p >= margin:
            specs.append(GaussianStateSpec(p0, sigma_p, x0))
    return specs


# ---------------------------------------------------------------------------
# resolution of identity


def check_resolution_of_identity(
    phi: WaveFunction,
    tg: clock.TimeGrid,
    transform: clock.AmplitudeTransform | None = None,
) -> CheckResult:
    """Reconstruct phi from its time amplitudes and report the relative
    grid-norm error of sum_alpha integral dt |t,alpha> <t,alpha|phi>."""
    if transform is None:
        transform = clock.AmplitudeTransform(phi.grid, tg)
    recon = transform.reconstruct(transform.amplitudes(phi))
    w = phi.grid.weights
    err = np.sqrt(np.sum(w * np.abs(recon - phi.values) ** 2))
    ref = np.sqrt(np.sum(w * np.abs(phi.values) ** 2))
    return two_sided(
        "resolution_of_identity",
        err / ref,
        1e-3,
        f"relative reconstruction error, window ({tg.t_min:g}, {tg.t_max:g}), m={tg.m}",
    )


# ---------------------------------------------------------------------------
# eigenvector overlap kernel


def damped_overlap(
    t1: float,
    t2: float,
    alpha1: int,
    alpha2: int,
    epsilon: float,
    e_max: float | None = None,
    e_step: float | None = None,
) -> complex:
    """<t1,alpha1|t2,alpha2> with damping exp(-eps p^2), by midpoint
    quadrature of eigenfunction values over an extended energy grid
    (E = p^2/2, dp = dE/|p|)."""
    if epsilon <= 0.0:
        raise ParameterError("damping epsilon must be positive")
    if e_max is None:
        e_max = 25.0 / (2.0 * epsilon)
    if e_step is None:
        e_step = min(0.05, 0.02 / max(abs(t1 - t2), 0.1))
    count = int(math.ceil(e_max / e_step))
    energies = (np.arange(count) + 0.5) * e_step
    p = alpha2 * np.sqrt(2.0 * energies)
    f = (
        np.conj(clock.eigenfunction(t1, alpha1, p))
        * clock.eigenfunction(t2, alpha2, p)
        * np.exp(-epsilon * p**2)
    )
    return complex(np.sum(f / np.abs(p)) * e_step)


def extrapolate_to_zero(values, epsilons) -> complex:
    """Linear extrapolation eps -> 0 from two (eps, value) pairs."""
    (e1, v1), (e2, v2) = sorted(zip(epsilons, values))
    return (e2 * v1 - e1 * v2) / (e2 - e1)


def check_gram_kernel(
    t1: float,
    t2: float,
    alpha: int = 1,
    epsilons=DEFAULT_EPSILONS,
) -> list[CheckResult]:
    """Overlap of two time eigenvectors against 1/(2 pi (t1 - t2)).

    The eigenvectors are not orthogonal: after damping extrapolation the
    overlap must be purely imaginary with value 1/(2 pi (t1 - t2)), zero
    across branches, and antisymmetric under t1 <-> t2.
    """
    if t1 == t2:
        raise ParameterError("overlap at t1 = t2 is distributional (delta diagonal)")
    sep = t1 - t2
    g12 = [damped_overlap(t1, t2, alpha, alpha, e) for e in epsilons]
    g21 = [damped_overlap(t2, t1, alpha, alpha, e) for e in epsilons]
    g0 = extrapolate_to_zero(g12, epsilons)
    g0_swapped = extrapolate_to_zero(g21, epsilons)
    cross = damped_overlap(t1, t2, alpha, -alpha, max(epsilons))
    target = 1.0 / (TWO_PI * sep)
    tag = f"dt={sep:g}, alpha={alpha:+d}"
    return [
        two_sided(
            f"gram_imag_rel_gap[{sep:g}]",
            (g0.imag - target) / target,
            0.05,
            f"{tag}; extrapolated imag overlap vs 1/(2 pi dt) = {target:.6g}",
        ),
        two_sided(
            f"gram_real_fraction[{sep:g}]",
            g0.real / abs(g0.imag),
            0.10,
            f"{tag}; residual real part relative to the imaginary part",
        ),
        two_sided(
            f"gram_cross_branch[{sep:g}]",
            abs(cross),
            1e-12,
            f"{tag}; overlap across branches (disjoint momentum supports)",
        ),
        two_sided(
            f"gram_antisymmetry[{sep:g}]",
            g0.imag + g0_swapped.imag,
            1e-12,
            f"{tag}; imag overlap must flip sign under t1 <-> t2",
        ),
    ]


# ---------------------------------------------------------------------------
# positivity and non-projectivity


def check_positivity(
    x: clock.Interval,
    grid: MomentumGrid,
    trials: int,
    seed: int,
    tq: int | None = None,
) -> list[CheckResult]:
    """Strict positivity of the measure of (a, b]: the matrix spectrum is
    nonnegative up to rounding and every sampled admissible state has a
    strictly positive quadratic form."""
    element = clock.povm_element(x, grid, tq)
    min_eig = float(element.eigenvalues()[0])
    forms = [
        clock.interval_probability(gaussian_state(spec, grid), x, tq)
        for spec in random_admissible_specs(grid, trials, seed)
    ]
    min_form = min(forms)
    tag = f"X=({x.a:g},{x.b:g}], n={grid.n}, trials={trials}, seed={seed}"
    return [
        one_sided(
            "positivity_min_eigenvalue",
            min_eig,
            1e-10,
            f"{tag}; smallest eigenvalue of the element matrix",
        ),
        one_sided(
            "positivity_min_form",
            min_form,
            0.0,
            f"{tag}; smallest <phi|tau(X)|phi>, expected strictly positive",
        ),
    ]


def check_non_projectivity(
    x: clock.Interval,
    grid: MomentumGrid,
    tq: int | None = None,
) -> list[CheckResult]:
    """The measure is not projection-valued: its elements have eigenvalues
    well inside (0, 1)."""
    element = clock.povm_element(x, grid, tq)
    mu = element.eigenvalues()
    defect = float(np.max(mu * (1.0 - mu)))
    m = element.entries
    norm_defect = float(
        np.linalg.norm(m @ m - m, 2) / np.linalg.norm(m, 2)
    )
    tag = f"X=({x.a:g},{x.b:g}], n={grid.n}"
    return [
        one_sided(
            "non_projectivity_defect_margin",
            defect - 0.05,
            0.0,
            f"{tag}; max mu(1-mu) = {defect:.6g}, a projection would give ~0",
        ),
        one_sided(
            "non_projectivity_norm_margin",
            norm_defect - 0.01,
            0.0,
            f"{tag}; |M^2 - M| / |M| = {norm_defect:.6g}",
        ),
    ]


# ---------------------------------------------------------------------------
# covariance


def check_covariance(
    phi: WaveFunction,
    k: int,
    tg: clock.TimeGrid,
    transform: clock.AmplitudeTransform | None = None,
) -> CheckResult:
    """Free evolution by lambda = k dt must shift the measured-time density
    by exactly k nodes.  Both densities are recomputed from scratch."""
    if abs(k) >= tg.m:
        raise TruncationError(
            f"shift k={k} exceeds the {tg.m}-node window", captured_mass=None
        )
    if transform is None:
        transform = clock.AmplitudeTransform(phi.grid, tg)
    lam = k * tg.dt
    base = clock.distribution_from_amplitudes(transform.amplitudes(phi)).density
    shifted = clock.distribution_from_amplitudes(
        transform.amplitudes(evolve(phi, lam))
    ).density
    if k >= 0:
        diff = shifted[k:] - base[: tg.m - k]
    else:
        diff = shifted[: tg.m + k] - base[-k:]
    return two_sided(
        f"covariance_shift_error[k={k}]",
        float(np.max(np.abs(diff))),
        1e-8,
        f"lambda = {lam:.17g}; max |rho_evolved(t_j) - rho(t_(j-k))| over overlapping nodes",
    )


def covariance_scan(
    phi: WaveFunction, ks, tg: clock.TimeGrid
) -> list[tuple[int, float]]:
    """Shift error for every k in ks, as (k, max abs density discrepancy).

    The base density is computed once; the evolved states are pushed
    through the same amplitude quadrature as one batch (one matrix product
    per branch, agreeing with the per-shift path to rounding).
    """
    ks = list(ks)
    if any(abs(k) >= tg.m for k in ks):
        raise TruncationError(
            f"some shift exceeds the {tg.m}-node window", captured_mass=None
        )
    transform = clock.AmplitudeTransform(phi.grid, tg)
    base = clock.distribution_from_amplitudes(transform.amplitudes(phi)).density
    lams = np.array([k * tg.dt for k in ks])
    evolved = phi.values[:, None] * np.exp(
        -0.5j * np.outer(phi.grid.samples**2, lams)
    )
    a_plus, a_minus = transform.batched_amplitudes(evolved)
    density = (np.abs(a_plus) ** 2 + np.abs(a_minus) ** 2).T
    out = []
    for row, k in enumerate(ks):
        if k >= 0:
            diff = density[row, k:] - base[: tg.m - k]
        else:
            diff = density[row, : tg.m + k] - base[-k:]
        out.append((k, float(np.max(np.abs(diff)))))
    return out


# ---------------------------------------------------------------------------
# moment identities


def lambda_cross_term(
    amp: clock.TimeAmplitudes, epsilons=DEFAULT_EPSILONS
) -> tuple[float, float]:
    """Cross term of the second-moment decomposition: the double integral
    of conj(t' A(t')) t A(t) against (i/2 pi) P(1/(t' - t)), damping-
    regularized and extrapolated.

    Returns (value, sign_flipped_value); the flipped value corresponds to
    the opposite principal-value sign convention.
    """
    tg = amp.timegrid
    t = tg.samples
    offsets = np.arange(-(tg.m - 1), tg.m) * tg.dt
    values = []
    for eps in epsilons:
        kernel = offsets / (TWO_PI * (4.0 * eps**2 + offsets**2))
        total = 0.0
        for a in (amp.a_plus, amp.a_minus):
            b = t * a
            conv = fftconvolve(b, kernel)[tg.m - 1 : 2 * tg.m - 1]
            total += (1j * np.vdot(b, conv) * tg.dt**2).real
        values.append(total)
    out = float(extrapolate_to_zero(values, epsilons).real)
    return out, -out


def check_moments(
    phi: WaveFunction,
    tg: clock.TimeGrid,
    epsilons=DEFAULT_EPSILONS,
    transform: clock.AmplitudeTransform | None = None,
) -> list[CheckResult]:
    """First and second moment identities between the operator T and the
    time distribution, plus the cross-term identity.

    The damping lattice resolves the smoothed kernel only when
    tg.dt <= 2 min(epsilons).
    """
    if transform is None:
        transform = clock.AmplitudeTransform(phi.grid, tg)
    amp = transform.amplitudes(phi)
    dist = clock.distribution_from_amplitudes(amp)
    if dist.total_mass < 1.0 - 1e-3:
        raise TruncationError(
            f"window captures only {dist.total_mass:.6g} of the distribution",
            captured_mass=dist.total_mass,
        )
    t_mean_op, t_sq_op = operators.time_moments(phi)
    t = tg.samples
    mean_povm = float(np.sum(t * dist.density) * tg.dt)
    second_povm = float(np.sum(t**2 * dist.density) * tg.dt)
    lam, lam_flipped = lambda_cross_term(amp, epsilons)
    lam_gap = (lam - 0.5 * t_sq_op) / t_sq_op
    flipped_gap = (lam_flipped - 0.5 * t_sq_op) / t_sq_op
    lam_context = (
        f"damping extrapolation eps={tuple(epsilons)}; "
        f"Lambda = {lam:.6g} vs half <T^2> = {0.5 * t_sq_op:.6g}"
    )
    if abs(lam_gap) > 1e-3 and abs(flipped_gap) <= 1e-3:
        lam_context += "; WARNING: the sign-flipped kernel convention fits instead"
    return [
        two_sided(
            "moment_first_gap",
            t_mean_op - mean_povm,
            1e-3,
            f"<T>_op = {t_mean_op:.6g} vs distribution mean {mean_povm:.6g}",
        ),
        two_sided(
            "moment_second_rel_gap",
            (t_sq_op - second_povm) / t_sq_op,
            1e-3,
            f"<T^2>_op = {t_sq_op:.6g} vs integral t^2 rho dt = {second_povm:.6g}",
        ),
        two_sided("moment_lambda_rel_gap", lam_gap, 1e-3, lam_context),
    ]


# ---------------------------------------------------------------------------
# full suite


def sigma_h_closed_form(spec: GaussianStateSpec) -> float:
    """Energy spread of a Gaussian packet: 0.5 sqrt(4 p0^2 s^2 + 2 s^4)."""
    return 0.5 * math.sqrt(
        4.0 * spec.p0**2 * spec.sigma_p**2 + 2.0 * spec.sigma_p**4
    )


def run_verification(
    grid: MomentumGrid,
    tg: clock.TimeGrid,
    spec: GaussianStateSpec,
    interval: clock.Interval,
    k: int = 64,
    trials: int = 100,
    seed: int = 1729,
    epsilons=DEFAULT_EPSILONS,
    matrix_n: int = 512,
    gram_separations=(0.5, 1.0, 2.0),
) -> VerificationReport:
    """Run every check family on one configuration.

    Eigendecomposition-based checks run on a coarsened copy of the grid
    (min(n, matrix_n) samples per half-line) to keep the dense element
    matrices tractable; all state-based checks use the full grid.
    """
    report = VerificationReport()
    phi = gaussian_state(spec, grid)
    transform = clock.AmplitudeTransform(grid, tg)
    report.add(check_resolution_of_identity(phi, tg, transform=transform))
    for sep in gram_separations:
        report.add(check_gram_kernel(sep, 0.0, alpha=1, epsilons=epsilons))
    eig_grid = (
        grid
        if grid.n <= matrix_n
        else make_grid(grid.p_min, grid.p_max, matrix_n)
    )
    report.add(check_positivity(interval, eig_grid, trials, seed))
    report.add(check_non_projectivity(interval, eig_grid))
    report.add(check_covariance(phi, k, tg, transform=transform))
    report.add(check_moments(phi, tg, epsilons, transform=transform))
    report.add(
        two_sided(
            "commutator_residual",
            operators.commutator_residual(phi),
            1e-3,
            f"|(HT - TH) phi + i phi| / |phi|, interior rows, n={grid.n}",
        )
    )
    report.add(
        one_sided(
            "uncertainty_product_margin",
            operators.uncertainty_product(phi) - 0.4995,
            0.0,
            "sigma_T sigma_H - 0.4995 on the configured state",
        )
    )
    _, sig_h = operators.energy_moments(phi)
    report.add(
        two_sided(
            "sigma_h_closed_form_gap",
            sig_h - sigma_h_closed_form(spec),
            1e-3,
            f"grid sigma_H = {sig_h:.8g} vs Gaussian closed form",
        )
    )
    return report
