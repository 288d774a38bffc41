"""Discretized Hermitian matrices for q, p, H, T and their moments.

The position operator in momentum representation is q = i d/dp, built
from 4th-order finite differences per half-line block (one-sided at the
block edges, so nothing couples across the excised p = 0 window).  The
time operator is T = (2p)^-1 q + q (2p)^-1, explicitly symmetrized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .clock import OperatorMatrix
from .errors import GridMismatchError, NumericalConsistencyError, ParameterError
from .hilbert import MomentumGrid, WaveFunction, inner

EDGE_EXCLUSION = 4
_NORM_SLACK = 1e-8


@dataclass(frozen=True)
class ClockOperators:
    """The clock's operator family on one grid."""

    grid: MomentumGrid
    q_mat: OperatorMatrix
    p_mat: OperatorMatrix
    h_mat: OperatorMatrix
    t_mat: OperatorMatrix


def _block_derivative(n: int, dp: float) -> sp.csr_matrix:
    """4th-order d/dp on one uniform block: central 5-point stencil with
    one-sided closures on the outermost two rows of each end."""
    d = sp.lil_matrix((n, n))
    c = 1.0 / (12.0 * dp)
    for i in range(2, n - 2):
        d[i, i - 2 : i + 3] = [c, -8.0 * c, 0.0, 8.0 * c, -c]
    d[0, 0:5] = [-25.0 * c, 48.0 * c, -36.0 * c, 16.0 * c, -3.0 * c]
    d[1, 0:5] = [-3.0 * c, -10.0 * c, 18.0 * c, -6.0 * c, c]
    d[n - 1, n - 5 : n] = [3.0 * c, -16.0 * c, 36.0 * c, -48.0 * c, 25.0 * c]
    d[n - 2, n - 5 : n] = [-c, 6.0 * c, -18.0 * c, 10.0 * c, 3.0 * c]
    return d.tocsr()


def scaled_position_sparse(grid: MomentumGrid) -> sp.csr_matrix:
    """q = i d/dp in the sqrt(w)-scaled basis, Hermitian-symmetrized."""
    d_block = _block_derivative(grid.n, grid.spacing)
    d_val = sp.block_diag([d_block, d_block], format="csr")
    root_w = np.sqrt(grid.weights)
    scaled = sp.diags(root_w) @ (1j * d_val) @ sp.diags(1.0 / root_w)
    return (0.5 * (scaled + scaled.conj().T)).tocsr()


def scaled_time_sparse(grid: MomentumGrid) -> sp.csr_matrix:
    """T = (2p)^-1 q + q (2p)^-1 in the scaled basis, symmetrized."""
    q = scaled_position_sparse(grid)
    inv2p = sp.diags(1.0 / (2.0 * grid.samples))
    raw = inv2p @ q + q @ inv2p
    return (0.5 * (raw + raw.conj().T)).tocsr()


def build_operators(grid: MomentumGrid) -> ClockOperators:
    """Dense q, p, H = p^2/2 and T matrices for the grid."""
    q = scaled_position_sparse(grid).toarray()
    t = scaled_time_sparse(grid).toarray()
    p = np.diag(grid.samples.astype(np.complex128))
    h = np.diag((0.5 * grid.samples**2).astype(np.complex128))
    return ClockOperators(
        grid,
        q_mat=OperatorMatrix(grid, q),
        p_mat=OperatorMatrix(grid, p),
        h_mat=OperatorMatrix(grid, h),
        t_mat=OperatorMatrix(grid, t),
    )


def _scaled_coefficients(m_grid: MomentumGrid, phi: WaveFunction) -> np.ndarray:
    if not phi.grid.compatible(m_grid):
        raise GridMismatchError("state and operator live on different grids")
    n2 = inner(phi, phi).real
    if abs(n2 - 1.0) > _NORM_SLACK:
        raise ParameterError(
            f"expectation values require a normalized state, got <phi|phi> = {n2!r}"
        )
    return np.sqrt(phi.grid.weights) * phi.values


def expectation(m: OperatorMatrix, phi: WaveFunction) -> float:
    """<phi|M|phi> for Hermitian M and normalized phi."""
    c = _scaled_coefficients(m.grid, phi)
    form = complex(np.vdot(c, m.entries @ c))
    if abs(form.imag) > 1e-10 * max(1.0, abs(form.real)):
        raise NumericalConsistencyError(
            f"quadratic form of a Hermitian matrix has imaginary part {form.imag!r}"
        )
    return form.real


def sigma(m: OperatorMatrix, phi: WaveFunction) -> float:
    """sqrt(<M^2> - <M>^2); <M^2> is computed as |M phi|^2, i.e. through
    the matrix square of the same discretization."""
    c = _scaled_coefficients(m.grid, phi)
    mc = m.entries @ c
    mean = np.vdot(c, mc).real
    var = float(np.sum(np.abs(mc - mean * c) ** 2))
    if not np.isfinite(var):
        raise NumericalConsistencyError("variance is not finite")
    return float(np.sqrt(var))


def time_moments(phi: WaveFunction) -> tuple[float, float]:
    """(<T>, <T^2>) through sparse application of the same T stencil."""
    t = scaled_time_sparse(phi.grid)
    c = _scaled_coefficients(phi.grid, phi)
    tc = t @ c
    return float(np.vdot(c, tc).real), float(np.sum(np.abs(tc) ** 2))


def energy_moments(phi: WaveFunction) -> tuple[float, float]:
    """(<H>, sigma_H); H is diagonal in momentum representation."""
    c2 = phi.grid.weights * np.abs(phi.values) ** 2
    e = 0.5 * phi.grid.samples**2
    mean = float(np.sum(e * c2))
    var = float(np.sum((e - mean) ** 2 * c2))
    return mean, float(np.sqrt(var))


def commutator_residual(phi: WaveFunction, edge_exclusion: int = EDGE_EXCLUSION) -> float:
    """|(HT - TH) phi + i phi| / |phi| in the grid norm, with rows within
    `edge_exclusion` samples of a block edge left out (the one-sided
    closure rows are lower order there)."""
    grid = phi.grid
    t = scaled_time_sparse(grid)
    c = np.sqrt(grid.weights) * phi.values
    e = 0.5 * grid.samples**2
    residual = e * (t @ c) - t @ (e * c) + 1j * c
    keep = np.ones(grid.size, dtype=bool)
    for start in (0, grid.n):
        keep[start : start + edge_exclusion] = False
        keep[start + grid.n - edge_exclusion : start + grid.n] = False
    num = float(np.sqrt(np.sum(np.abs(residual[keep]) ** 2)))
    den = float(np.sqrt(np.sum(np.abs(c) ** 2)))
    return num / den


def uncertainty_product(phi: WaveFunction, ops: ClockOperators | None = None) -> float:
    """sigma_T sigma_H for a normalized state."""
    if ops is not None:
        return sigma(ops.t_mat, phi) * sigma(ops.h_mat, phi)
    t = scaled_time_sparse(phi.grid)
    c = _scaled_coefficients(phi.grid, phi)
    tc = t @ c
    t_mean = np.vdot(c, tc).real
    sigma_t = float(np.sqrt(np.sum(np.abs(tc - t_mean * c) ** 2)))
    _, sigma_h = energy_moments(phi)
    return sigma_t * sigma_h
