"""Cross-checks between the sparse engine and the dense reference engine."""

import numpy as np
import pytest

from qtag import (
    MODES,
    ModeMap,
    ProtocolSpec,
    PureState,
    Variant,
    apply_single_photon_map,
)
from qtag import dense
from qtag.optics import rotation_map, sigma_z_path1, tag_h, tag_v
from qtag.protocols import evolve_active, evolve_passive_direct, evolve_passive_tagged
from helpers import haar_unitary, random_coefficients, random_state, random_thetas


@pytest.mark.parametrize(
    "matrix_fn",
    [
        lambda: dense.rotation_matrix(0.83),
        dense.tag_v_matrix,
        dense.tag_h_matrix,
        dense.decoder_matrix,
        dense.path_phase_matrix,
    ],
    ids=["rotation", "tag_v", "tag_h", "decoder", "path_phase"],
)
def test_element_matrices_are_unitary(matrix_fn):
    mat = matrix_fn()
    assert np.allclose(mat.conj().T @ mat, np.eye(dense.N_MODES), atol=1e-12)


@pytest.mark.parametrize(
    "make_map,matrix_fn",
    [
        (lambda: rotation_map(0.83), lambda: dense.rotation_matrix(0.83)),
        (tag_v, dense.tag_v_matrix),
        (tag_h, dense.tag_h_matrix),
        (sigma_z_path1, dense.path_phase_matrix),
    ],
    ids=["rotation", "tag_v", "tag_h", "path_phase"],
)
def test_matrices_agree_with_sparse_maps_on_valid_modes(make_map, matrix_fn):
    mode_map = make_map()
    mat = matrix_fn()
    for j, mode in enumerate(MODES):
        if mode in mode_map.forbidden:
            continue
        out = apply_single_photon_map(PureState(1, {(mode,): 1.0}), 0, mode_map)
        assert dense.max_amplitude_diff(out, mat[:, j]) <= 1e-12


class TestPipelineAgreement:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_all_variants(self, n):
        rng = np.random.default_rng(200 + n)
        for _ in range(10):
            coeffs = random_coefficients(rng)
            thetas = random_thetas(rng, n)
            direct = ProtocolSpec(n, coeffs, Variant.PASSIVE_DIRECT, thetas)
            tagged = ProtocolSpec(n, coeffs, Variant.PASSIVE_TAGGED, thetas)
            active = ProtocolSpec(n, coeffs, Variant.ACTIVE_PC, thetas)
            assert (
                dense.max_amplitude_diff(
                    evolve_passive_direct(direct), dense.passive_direct_vector(direct)
                )
                <= 1e-12
            )
            assert (
                dense.max_amplitude_diff(
                    evolve_passive_tagged(tagged), dense.passive_tagged_vector(tagged)
                )
                <= 1e-12
            )
            assert (
                dense.max_amplitude_diff(
                    evolve_active(active), dense.active_vector(active)
                )
                <= 1e-12
            )
            assert (
                dense.max_amplitude_diff(
                    evolve_active(active, correct_path_phase=False),
                    dense.active_vector(active, correct_path_phase=False),
                )
                <= 1e-12
            )


class TestRandomCircuits:
    def test_sparse_matches_dense(self):
        rng = np.random.default_rng(321)
        for trial in range(20):
            n = 2 + trial % 3
            state = random_state(rng, n)
            vec = dense.state_vector(state)
            for _ in range(5):
                idx = int(rng.integers(0, n))
                mat = haar_unitary(rng, dense.N_MODES)
                state = apply_single_photon_map(
                    state, idx, ModeMap.from_matrix("haar", mat)
                )
                vec = dense.apply_one_photon(vec, n, idx, mat)
            assert dense.max_amplitude_diff(state, vec) <= 1e-12
