"""Discretized momentum-space Hilbert space.

The momentum axis is two symmetric half-lines (-p_max, -p_min] and
[p_min, p_max); the window around p = 0 is excised because the time
operator contains (2p)^-1 and its eigenfunctions live on half-lines.
Units: hbar = m = 1, so H = p^2/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridMismatchError, ParameterError

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Uniform two-block momentum grid with composite-trapezoid weights.

    samples[:n] is the negative half-line in ascending order
    (-p_max ... -p_min), samples[n:] the positive one (p_min ... p_max).
    Per-half weights sum to p_max - p_min.
    """

    p_min: float
    p_max: float
    n: int
    samples: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.samples.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def size(self) -> int:
        return 2 * self.n

    @property
    def spacing(self) -> float:
        return (self.p_max - self.p_min) / (self.n - 1)

    def half_slice(self, alpha: int) -> slice:
        """Index slice of the half-line with sign(p) = alpha."""
        if alpha == 1:
            return slice(self.n, 2 * self.n)
        if alpha == -1:
            return slice(0, self.n)
        raise ParameterError(f"branch must be +1 or -1, got {alpha}")

    def compatible(self, other: "MomentumGrid") -> bool:
        return self is other or (
            self.p_min == other.p_min
            and self.p_max == other.p_max
            and self.n == other.n
        )


def make_grid(p_min: float, p_max: float, n: int) -> MomentumGrid:
    """Build the 2n-sample grid covering both half-lines.

    Requires 0 < p_min < p_max and n >= 16 samples per half-line.
    """
    if not (0.0 < p_min < p_max):
        raise ParameterError(
            f"momentum bounds must satisfy 0 < p_min < p_max, got ({p_min}, {p_max})"
        )
    if n < 16:
        raise ParameterError(f"need at least 16 samples per half-line, got {n}")
    positive = np.linspace(p_min, p_max, n)
    samples = np.concatenate([-positive[::-1], positive])
    dp = (p_max - p_min) / (n - 1)
    half_weights = np.full(n, dp)
    half_weights[0] = half_weights[-1] = dp / 2.0
    weights = np.concatenate([half_weights[::-1], half_weights])
    return MomentumGrid(p_min, p_max, n, samples, weights)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex amplitudes of a pure state over a MomentumGrid."""

    grid: MomentumGrid
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if values.shape != (self.grid.size,):
            raise ParameterError(
                f"values must have shape ({self.grid.size},), got {values.shape}"
            )
        if not np.all(np.isfinite(values.view(np.float64))):
            raise ParameterError("wave function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.normalized:
            n2 = float(np.sum(self.grid.weights * np.abs(values) ** 2))
            if abs(n2 - 1.0) >= NORM_TOL:
                raise ParameterError(
                    f"state flagged normalized has <phi|phi> = {n2!r}"
                )

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.grid.weights * np.abs(self.values) ** 2)))


@dataclass(frozen=True)
class GaussianStateSpec:
    """Gaussian wave packet parameters: mean momentum p0, spread sigma_p,
    mean position x0."""

    p0: float
    sigma_p: float
    x0: float

    def __post_init__(self):
        if not self.sigma_p > 0.0:
            raise ParameterError(f"sigma_p must be positive, got {self.sigma_p}")

    def admissibility_margin(self, grid: MomentumGrid) -> float:
        """Distance (in units of sigma_p) from the packet center to the
        inner grid edge.  Admissible states need >= 6."""
        return (abs(self.p0) - grid.p_min) / self.sigma_p

    def is_admissible(self, grid: MomentumGrid) -> bool:
        return self.admissibility_margin(grid) >= 6.0


def gaussian_state(spec: GaussianStateSpec, grid: MomentumGrid) -> WaveFunction:
    """Sample exp(-(p-p0)^2/(4 sigma_p^2)) exp(-i x0 p) on the grid and
    renormalize to unit grid norm.

    Raises DomainError if the packet violates the admissibility condition
    |p0| - 6 sigma_p >= p_min (tail would reach the excised p = 0 region,
    where the domain requires phi(p)/sqrt(p) -> 0).
    """
    if not spec.is_admissible(grid):
        raise DomainError(
            f"inadmissible spec {spec}: |p0| - 6 sigma_p = "
            f"{abs(spec.p0) - 6 * spec.sigma_p:.6g} < p_min = {grid.p_min}"
        )
    p = grid.samples
    envelope = (2.0 * np.pi * spec.sigma_p**2) ** (-0.25) * np.exp(
        -((p - spec.p0) ** 2) / (4.0 * spec.sigma_p**2)
    )
    values = envelope * np.exp(-1j * spec.x0 * p)
    norm = np.sqrt(np.sum(grid.weights * np.abs(values) ** 2))
    return WaveFunction(grid, values / norm, normalized=True)


def inner(a: WaveFunction, b: WaveFunction) -> complex:
    """Grid inner product <a|b> = sum_i w_i conj(a_i) b_i."""
    if not a.grid.compatible(b.grid):
        raise GridMismatchError("inner product requires states on the same grid")
    return complex(np.sum(a.grid.weights * np.conj(a.values) * b.values))


def evolve(phi: WaveFunction, lam: float) -> WaveFunction:
    """Free evolution U(lam) = exp(-i lam H): multiply by exp(-i lam p^2/2)."""
    phase = np.exp(-0.5j * lam * phi.grid.samples**2)
    return WaveFunction(phi.grid, phi.values * phase, normalized=phi.normalized)
