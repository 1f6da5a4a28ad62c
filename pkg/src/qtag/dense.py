"""Dense reference evolution over the full 12^N mode space.

An independent cross-check for the sparse engine: a state is a numpy array
with one 12-way axis per photon (flattened to length 12^N), and every
optical element is a dense 12x12 matrix built here from scratch rather
than from the sparse mode maps.  The verification harness asserts
amplitude-by-amplitude agreement between the two engines on the same
circuits.

Columns for inputs the protocols can never produce (a doubly delayed
component entering a tag stage, or a photon already routed to path 1
entering the decoder) are completed arbitrarily but unitarily, so every
matrix here is a genuine unitary.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError
from .hilbert import (
    MODE_INDEX,
    MODES,
    Path,
    PhotonMode,
    Polarization,
    PureState,
)
from .protocols import ProtocolSpec

__all__ = [
    "N_MODES",
    "state_vector",
    "max_amplitude_diff",
    "apply_one_photon",
    "rotation_matrix",
    "tag_v_matrix",
    "tag_h_matrix",
    "decoder_matrix",
    "path_phase_matrix",
    "source_vector",
    "passive_direct_vector",
    "passive_tagged_vector",
    "active_vector",
]

N_MODES = len(MODES)

_H, _V = Polarization.H, Polarization.V
_P1, _P2 = Path.ONE, Path.TWO


def _idx(pol: Polarization, b: int, path: Path) -> int:
    return MODE_INDEX[PhotonMode(pol, b, path)]


def state_vector(s: PureState) -> np.ndarray:
    """Flatten a sparse state into the dense 12^N amplitude vector."""
    n = s.n_photons
    vec = np.zeros(N_MODES**n, dtype=complex)
    for ket, amp in s.amplitudes.items():
        flat = 0
        for mode in ket:
            flat = flat * N_MODES + MODE_INDEX[mode]
        vec[flat] = amp
    return vec


def max_amplitude_diff(s: PureState, vec: np.ndarray) -> float:
    """Largest absolute amplitude difference between a sparse state and a
    dense vector."""
    dense = state_vector(s)
    if dense.shape != np.shape(vec):
        raise DimensionError(
            f"dense vector has shape {np.shape(vec)}, expected {dense.shape}"
        )
    return float(np.max(np.abs(dense - np.asarray(vec, dtype=complex))))


def apply_one_photon(
    vec: np.ndarray, n_photons: int, photon_index: int, matrix: np.ndarray
) -> np.ndarray:
    """Apply a 12x12 matrix to one photon axis of a flattened state."""
    if not 0 <= photon_index < n_photons:
        raise DimensionError(f"photon index {photon_index} outside [0, {n_photons})")
    psi = np.asarray(vec, dtype=complex).reshape((N_MODES,) * n_photons)
    psi = np.tensordot(np.asarray(matrix, dtype=complex), psi, axes=([1], [photon_index]))
    psi = np.moveaxis(psi, 0, photon_index)
    return psi.reshape(-1)


def rotation_matrix(theta: float) -> np.ndarray:
    """Collective rotation: 2x2 trig block on polarization, identity on
    time bin and path."""
    c, s = math.cos(theta), math.sin(theta)
    mat = np.zeros((N_MODES, N_MODES), dtype=complex)
    for b in range(3):
        for p in Path:
            h, v = _idx(_H, b, p), _idx(_V, b, p)
            mat[h, h] = c
            mat[v, h] = s
            mat[h, v] = -s
            mat[v, v] = c
    return mat


def tag_v_matrix() -> np.ndarray:
    """Vertical component gains one time unit (cyclic on the unused
    overflow bin to stay a permutation); horizontal untouched."""
    mat = np.zeros((N_MODES, N_MODES), dtype=complex)
    for b in range(3):
        for p in Path:
            mat[_idx(_H, b, p), _idx(_H, b, p)] = 1.0
            mat[_idx(_V, (b + 1) % 3, p), _idx(_V, b, p)] = 1.0
    return mat


def tag_h_matrix() -> np.ndarray:
    """Mirror of :func:`tag_v_matrix`."""
    mat = np.zeros((N_MODES, N_MODES), dtype=complex)
    for b in range(3):
        for p in Path:
            mat[_idx(_V, b, p), _idx(_V, b, p)] = 1.0
            mat[_idx(_H, (b + 1) % 3, p), _idx(_H, b, p)] = 1.0
    return mat


def decoder_matrix() -> np.ndarray:
    """Gated decoding circuit as a 12x12 permutation.

    The four operating-window inputs route as in the sparse map; the eight
    remaining inputs (never produced by the protocols) are completed
    bijectively onto the unused outputs.
    """
    pairs = {
        _idx(_H, 0, _P2): _idx(_H, 1, _P2),
        _idx(_V, 1, _P2): _idx(_V, 1, _P2),
        _idx(_V, 0, _P2): _idx(_H, 1, _P1),
        _idx(_H, 1, _P2): _idx(_V, 1, _P1),
        # unitary completion on unreachable inputs
        _idx(_H, 1, _P1): _idx(_H, 0, _P2),
        _idx(_V, 1, _P1): _idx(_V, 0, _P2),
        _idx(_H, 0, _P1): _idx(_H, 0, _P1),
        _idx(_V, 0, _P1): _idx(_V, 0, _P1),
        _idx(_H, 2, _P1): _idx(_H, 2, _P1),
        _idx(_V, 2, _P1): _idx(_V, 2, _P1),
        _idx(_H, 2, _P2): _idx(_H, 2, _P2),
        _idx(_V, 2, _P2): _idx(_V, 2, _P2),
    }
    mat = np.zeros((N_MODES, N_MODES), dtype=complex)
    for src, dst in pairs.items():
        mat[dst, src] = 1.0
    return mat


def path_phase_matrix() -> np.ndarray:
    """Diagonal phase flip: V on path 1 acquires a minus sign."""
    diag = np.ones(N_MODES, dtype=complex)
    for b in range(3):
        diag[_idx(_V, b, _P1)] = -1.0
    return np.diag(diag)


def source_vector(n: int, alpha: complex, beta: complex) -> np.ndarray:
    """Dense counterpart of the two-component source state."""
    vec = np.zeros(N_MODES**n, dtype=complex)
    h0 = _idx(_H, 0, _P2)
    v0 = _idx(_V, 0, _P2)
    flat_h = flat_v = 0
    for _ in range(n):
        flat_h = flat_h * N_MODES + h0
        flat_v = flat_v * N_MODES + v0
    vec[flat_h] = alpha
    vec[flat_v] = beta
    return vec


def _apply_everywhere(vec: np.ndarray, n: int, matrix: np.ndarray) -> np.ndarray:
    for i in range(n):
        vec = apply_one_photon(vec, n, i, matrix)
    return vec


def passive_direct_vector(spec: ProtocolSpec) -> np.ndarray:
    """Dense evolution of the direct pipeline."""
    n = spec.n_parties
    vec = source_vector(n, spec.coeffs.alpha, spec.coeffs.beta)
    for i, theta in enumerate(spec.thetas):
        vec = apply_one_photon(vec, n, i, rotation_matrix(theta))
    return vec


def passive_tagged_vector(spec: ProtocolSpec) -> np.ndarray:
    """Dense evolution of the tagged pipeline."""
    n = spec.n_parties
    vec = source_vector(n, spec.coeffs.alpha, spec.coeffs.beta)
    vec = _apply_everywhere(vec, n, tag_v_matrix())
    for i, theta in enumerate(spec.thetas):
        vec = apply_one_photon(vec, n, i, rotation_matrix(theta))
    return _apply_everywhere(vec, n, tag_h_matrix())


def active_vector(spec: ProtocolSpec, correct_path_phase: bool = True) -> np.ndarray:
    """Dense evolution of the active pipeline."""
    n = spec.n_parties
    vec = source_vector(n, spec.coeffs.alpha, spec.coeffs.beta)
    vec = _apply_everywhere(vec, n, tag_v_matrix())
    for i, theta in enumerate(spec.thetas):
        vec = apply_one_photon(vec, n, i, rotation_matrix(theta))
    vec = _apply_everywhere(vec, n, decoder_matrix())
    if correct_path_phase:
        vec = _apply_everywhere(vec, n, path_phase_matrix())
    return vec
