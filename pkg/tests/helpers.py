"""Shared test utilities: random states, coefficients, and unitaries."""

import math

import numpy as np

from qtag import MODES, PhotonMode, PureState, SourceCoefficients


def random_coefficients(rng: np.random.Generator) -> SourceCoefficients:
    v = rng.normal(size=4)
    alpha = complex(v[0], v[1])
    beta = complex(v[2], v[3])
    norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    return SourceCoefficients(alpha / norm, beta / norm)


def random_thetas(rng: np.random.Generator, n: int) -> tuple[float, ...]:
    return tuple(float(t) for t in rng.uniform(-2.0 * math.pi, 2.0 * math.pi, n))


def random_state(
    rng: np.random.Generator,
    n_photons: int,
    allowed_modes: tuple[PhotonMode, ...] = MODES,
    max_terms: int = 6,
) -> PureState:
    """Normalized state over random kets drawn from ``allowed_modes``."""
    n_terms = int(rng.integers(1, max_terms + 1))
    amps = {}
    for _ in range(n_terms):
        ket = tuple(
            allowed_modes[int(i)]
            for i in rng.integers(0, len(allowed_modes), n_photons)
        )
        re, im = rng.normal(size=2)
        amps[ket] = amps.get(ket, 0j) + complex(re, im)
    state = PureState(n_photons, amps)
    norm = math.sqrt(sum(abs(a) ** 2 for a in state.amplitudes.values()))
    return PureState(
        n_photons, {k: v / norm for k, v in state.amplitudes.items()}
    )


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def max_amp_diff(a: PureState, b: PureState) -> float:
    """Largest absolute amplitude difference across the union of kets."""
    kets = set(a.amplitudes) | set(b.amplitudes)
    return max(
        (abs(a.amplitudes.get(k, 0j) - b.amplitudes.get(k, 0j)) for k in kets),
        default=0.0,
    )
