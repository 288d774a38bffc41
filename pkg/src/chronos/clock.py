"""The clock's time observable.

Weak eigenfunctions of the time operator, the amplitude transform
A_alpha(t) = <t,alpha|phi>, the measured-time density rho(t), dense
positive-semidefinite matrices for finite-interval measure elements,
and distribution moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    GridMismatchError,
    NumericalConsistencyError,
    ParameterError,
    TruncationError,
    UnboundedIntervalError,
)
from .hilbert import MomentumGrid, WaveFunction

HERMITICITY_TOL = 1e-10
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Uniform time window [t_min, t_max] with m samples."""

    t_min: float
    t_max: float
    m: int
    samples: np.ndarray
    dt: float

    def __post_init__(self):
        self.samples.setflags(write=False)

    @property
    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.m, self.dt)
        w[0] = w[-1] = self.dt / 2.0
        return w


def make_time_grid(t_min: float, t_max: float, m: int) -> TimeGrid:
    if not t_min < t_max:
        raise ParameterError(f"need t_min < t_max, got ({t_min}, {t_max})")
    if m < 16:
        raise ParameterError(f"need at least 16 time samples, got {m}")
    samples = np.linspace(t_min, t_max, m)
    return TimeGrid(t_min, t_max, m, samples, (t_max - t_min) / (m - 1))


@dataclass(frozen=True)
class Interval:
    """Half-open time interval (a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if math.isnan(self.a) or math.isnan(self.b):
            raise ParameterError("interval endpoints must not be NaN")
        if not self.a < self.b:
            raise ParameterError(f"need a < b, got ({self.a}, {self.b})")

    @property
    def width(self) -> float:
        return self.b - self.a

    def is_finite(self) -> bool:
        return math.isfinite(self.a) and math.isfinite(self.b)


def eigenfunction(t: float, alpha: int, p):
    """Weak eigenfunction of the time operator at time label t, branch alpha.

    psi(p) = (2 pi)^(-1/2) theta(alpha p) sqrt(|p|) exp(-i t p^2 / 2);
    identically zero on the half-line alpha p < 0.  p may be a scalar or
    an array; p = 0 is outside the domain.
    """
    if alpha not in (1, -1):
        raise ParameterError(f"branch must be +1 or -1, got {alpha}")
    p_arr = np.asarray(p, dtype=np.float64)
    if np.any(p_arr == 0.0):
        raise DomainError("eigenfunction undefined at p = 0")
    support = (alpha * p_arr) > 0.0
    out = np.where(
        support,
        np.sqrt(np.abs(p_arr) / TWO_PI) * np.exp(-0.5j * t * p_arr**2),
        0.0 + 0.0j,
    )
    return complex(out) if np.isscalar(p) else out


@dataclass(frozen=True, eq=False)
class TimeAmplitudes:
    """Per-branch amplitudes A_alpha(t) = <t,alpha|phi> on a TimeGrid."""

    timegrid: TimeGrid
    a_plus: np.ndarray
    a_minus: np.ndarray

    def __post_init__(self):
        for arr in (self.a_plus, self.a_minus):
            if arr.shape != (self.timegrid.m,):
                raise ParameterError("amplitude arrays must match the time grid")
            if not np.all(np.isfinite(arr.view(np.float64))):
                raise ParameterError("amplitudes must be finite")
            arr.setflags(write=False)


@dataclass(frozen=True, eq=False)
class TimeDistribution:
    """Density rho(t) = |A_+1(t)|^2 + |A_-1(t)|^2 and its window mass."""

    timegrid: TimeGrid
    density: np.ndarray
    total_mass: float

    def __post_init__(self):
        if self.density.shape != (self.timegrid.m,):
            raise ParameterError("density must match the time grid")
        if not np.all(np.isfinite(self.density)) or np.any(self.density < 0.0):
            raise NumericalConsistencyError("density must be finite and nonnegative")
        self.density.setflags(write=False)


class AmplitudeTransform:
    """Quadrature map between grid states and time amplitudes.

    Precomputes the oscillatory phase matrix exp(i t_j p_i^2 / 2) once per
    (grid, timegrid) pair; both momentum branches share it because the
    kinetic energy is even in p.  The direct O(m n) summation is the
    reference amplitude path.
    """

    def __init__(self, grid: MomentumGrid, timegrid: TimeGrid):
        self.grid = grid
        self.timegrid = timegrid
        pos = grid.half_slice(1)
        p = grid.samples[pos]
        self._energies = 0.5 * p**2
        # u_i = w_i sqrt(|p_i| / 2 pi), the quadrature prefactor of
        # integral conj(psi_t(p)) phi(p) dp on one half-line
        self._u_pos = grid.weights[pos] * np.sqrt(p / TWO_PI)
        neg = grid.half_slice(-1)
        self._u_neg = grid.weights[neg] * np.sqrt(-grid.samples[neg] / TWO_PI)
        self._phases = np.exp(1j * np.outer(timegrid.samples, self._energies))

    def amplitudes(self, phi: WaveFunction) -> TimeAmplitudes:
        """A_alpha(t_j) by half-line quadrature of conj(psi) phi."""
        if not phi.grid.compatible(self.grid):
            raise GridMismatchError("state grid does not match the transform grid")
        g_pos = self._u_pos * phi.values[self.grid.half_slice(1)]
        # negative-half samples ascend from -p_max, so their energies are
        # the positive-half energies reversed
        g_neg = (self._u_neg * phi.values[self.grid.half_slice(-1)])[::-1]
        return TimeAmplitudes(self.timegrid, self._phases @ g_pos, self._phases @ g_neg)

    def batched_amplitudes(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(A_plus, A_minus) for each column of a (grid.size, count) block
        of state values; same quadrature as `amplitudes`, one matrix
        product per branch."""
        if values.shape[0] != self.grid.size:
            raise GridMismatchError("state block does not match the transform grid")
        g_pos = self._u_pos[:, None] * values[self.grid.half_slice(1)]
        g_neg = (self._u_neg[:, None] * values[self.grid.half_slice(-1)])[::-1]
        return self._phases @ g_pos, self._phases @ g_neg

    def reconstruct(self, amp: TimeAmplitudes) -> np.ndarray:
        """Values of sum_alpha integral dt |t,alpha> A_alpha(t) on the grid."""
        if amp.timegrid is not self.timegrid:
            raise GridMismatchError("amplitudes do not belong to this transform")
        dt = self.timegrid.dt
        pos = self.grid.half_slice(1)
        neg = self.grid.half_slice(-1)
        p_pos = self.grid.samples[pos]
        back = self._phases.conj().T
        out = np.empty(self.grid.size, dtype=np.complex128)
        out[pos] = np.sqrt(p_pos / TWO_PI) * (back @ amp.a_plus) * dt
        out[neg] = (np.sqrt(p_pos / TWO_PI) * (back @ amp.a_minus) * dt)[::-1]
        return out


def amplitudes(phi: WaveFunction, tg: TimeGrid) -> TimeAmplitudes:
    return AmplitudeTransform(phi.grid, tg).amplitudes(phi)


def distribution_from_amplitudes(amp: TimeAmplitudes) -> TimeDistribution:
    density = np.abs(amp.a_plus) ** 2 + np.abs(amp.a_minus) ** 2
    total_mass = float(np.sum(density) * amp.timegrid.dt)
    return TimeDistribution(amp.timegrid, density, total_mass)


def time_distribution(phi: WaveFunction, tg: TimeGrid) -> TimeDistribution:
    """Measured-time density rho(t_j) with its window mass sum rho dt."""
    return distribution_from_amplitudes(amplitudes(phi, tg))


def interval_time_nodes(x: Interval, p_max: float, tq: int | None = None):
    """Composite-trapezoid nodes and weights over (a, b].

    The default node count resolves the fastest phase on the grid:
    p_max^2 dt/2 < pi/4 per step, with a floor of 64 nodes.
    """
    if not x.is_finite():
        raise UnboundedIntervalError(
            "measure-element matrices require a finite interval"
        )
    if tq is None:
        tq = max(64, math.ceil(2.0 * x.width * p_max**2 / math.pi) + 1)
    elif tq < 64:
        raise ParameterError(f"need at least 64 time quadrature nodes, got {tq}")
    nodes = np.linspace(x.a, x.b, tq)
    weights = np.full(tq, x.width / (tq - 1))
    weights[0] = weights[-1] = weights[0] / 2.0
    return nodes, weights


def povm_element(x: Interval, grid: MomentumGrid, tq: int | None = None):
    """Matrix of the measure element for (a, b] in the orthonormalized
    grid basis: sum_alpha integral_X psi(p_i) conj(psi(p_j)) dt sqrt(w_i w_j).

    Time integration is composite trapezoid, so the matrix is a
    positively-weighted sum of rank-one projectors: Hermitian and positive
    semidefinite by construction.  Block-diagonal across the half-lines.
    """
    nodes, wt = interval_time_nodes(x, grid.p_max, tq)
    entries = np.zeros((grid.size, grid.size), dtype=np.complex128)
    for alpha in (1, -1):
        half = grid.half_slice(alpha)
        p = grid.samples[half]
        energies = 0.5 * p**2
        # column k holds sqrt(w_i) psi_{t_k}(p_i) on this half-line
        v = np.sqrt(grid.weights[half] * np.abs(p) / TWO_PI)[:, None] * np.exp(
            -1j * np.outer(energies, nodes)
        )
        block = (v * wt) @ v.conj().T
        entries[half, half] = 0.5 * (block + block.conj().T)
    return OperatorMatrix(grid, entries)


def interval_probability(
    phi: WaveFunction, x: Interval, tq: int | None = None
) -> float:
    """<phi|tau(X)|phi> through the density path.

    Quadrature of rho(t) over the same trapezoid nodes that assemble the
    matrix element; each term wt_k rho(t_k) is nonnegative, so the result
    cannot go negative by cancellation.
    """
    nodes, wt = interval_time_nodes(x, phi.grid.p_max, tq)
    tg = TimeGrid(float(nodes[0]), float(nodes[-1]), len(nodes), nodes,
                  float(nodes[1] - nodes[0]))
    amp = AmplitudeTransform(phi.grid, tg).amplitudes(phi)
    rho = np.abs(amp.a_plus) ** 2 + np.abs(amp.a_minus) ** 2
    return float(np.sum(wt * rho))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense Hermitian matrix over the grid, acting on sqrt(w)-scaled
    coefficients so the matrix quadratic form equals the continuum
    <phi|A|phi> under grid quadrature."""

    grid: MomentumGrid
    entries: np.ndarray

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=np.complex128)
        side = self.grid.size
        if entries.shape != (side, side):
            raise ParameterError(
                f"entries must be {side} x {side}, got {entries.shape}"
            )
        scale = float(np.max(np.abs(entries)))
        defect = float(np.max(np.abs(entries - entries.conj().T)))
        if scale > 0.0 and defect >= HERMITICITY_TOL * scale:
            raise ParameterError(
                f"matrix is not Hermitian: defect {defect:.3e} vs scale {scale:.3e}"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


def mean_and_variance(d: TimeDistribution) -> tuple[float, float]:
    """Mean and variance of the normalized window density.

    Requires the window to capture at least 1 - 1e-3 of the mass;
    otherwise reports the captured mass in a TruncationError.
    """
    if d.total_mass < 1.0 - 1e-3:
        raise TruncationError(
            f"window captures only {d.total_mass:.6g} of the distribution",
            captured_mass=d.total_mass,
        )
    t = d.timegrid.samples
    q = d.density * d.timegrid.dt / d.total_mass
    mean = float(np.sum(t * q))
    var = float(np.sum((t - mean) ** 2 * q))
    return mean, var
