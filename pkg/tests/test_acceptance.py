"""Acceptance suite.

Each test implements one release criterion at its stated tolerance and
prints one pass/fail line; run with ``pytest tests/test_acceptance.py -v -s``
to see the lines.
"""

import functools
import math
import time

import numpy as np

from qtag import (
    MODES,
    ModeMap,
    PHI_MINUS,
    ProtocolSpec,
    SweepGrid,
    Variant,
    apply_single_photon_map,
    closed_form_f1,
    closed_form_f2,
    norm_squared,
    run_active,
    run_active_without_correction,
    run_passive_direct,
    run_passive_tagged,
    sweep,
)
from qtag import dense
from qtag.optics import active_decoder_map, rotation_map, sigma_z_path1, tag_h, tag_v
from helpers import haar_unitary, random_coefficients, random_state, random_thetas

TOL = 1e-12


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"{name}: FAIL")
                raise
            print(f"{name}: PASS")

        return wrapper

    return decorate


def _random_specs(seed, count):
    """Deterministic stream of (n, thetas, coeffs) parameter sets."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, 6))
        yield n, random_thetas(rng, n), random_coefficients(rng)


@criterion("criterion 1: accepted/conditional branch fidelity is unity")
def test_criterion_1_unit_fidelity():
    start = time.monotonic()
    for n, thetas, coeffs in _random_specs(seed=1001, count=500):
        tagged = run_passive_tagged(
            ProtocolSpec(n, coeffs, Variant.PASSIVE_TAGGED, thetas)
        )
        accepted = (1,) * n
        if accepted in tagged.branches:
            assert abs(tagged.branches[accepted].fidelity - 1.0) <= TOL
        assert abs(tagged.overall_fidelity_of_accepted - 1.0) <= TOL
        active = run_active(ProtocolSpec(n, coeffs, Variant.ACTIVE_PC, thetas))
        for branch in active.branches.values():
            assert abs(branch.fidelity - 1.0) <= TOL
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"runtime target missed: {elapsed:.1f}s"


@criterion("criterion 2: passive acceptance probability is prod(cos^2)")
def test_criterion_2_passive_efficiency():
    for n, thetas, coeffs in _random_specs(seed=1001, count=500):
        out = run_passive_tagged(ProtocolSpec(n, coeffs, Variant.PASSIVE_TAGGED, thetas))
        expected = math.prod(math.cos(t) ** 2 for t in thetas)
        assert abs(out.total_success_probability - expected) <= TOL


@criterion("criterion 3: direct-transmission fidelities match closed forms")
def test_criterion_3_direct_fidelities():
    rng = np.random.default_rng(3003)
    exercised_two = exercised_three = False
    for _ in range(250):
        n = int(rng.integers(2, 4))
        thetas = random_thetas(rng, n)
        coeffs = random_coefficients(rng)
        out = run_passive_direct(ProtocolSpec(n, coeffs, Variant.PASSIVE_DIRECT, thetas))
        if n == 2:
            expected = closed_form_f1(*thetas, coeffs)
            cross = coeffs.beta.conjugate() * coeffs.alpha
            exercised_two |= abs(cross.real) > 0.01
        else:
            expected = closed_form_f2(*thetas, coeffs)
            cross = coeffs.beta.conjugate() * coeffs.alpha
            exercised_three |= abs(cross.imag) > 0.01
        assert abs(out.overall_fidelity_of_accepted - expected) <= TOL
    # the random draws must include genuinely complex cross terms
    assert exercised_two and exercised_three


@criterion("criterion 4: default sweep reproduces the analytic curves")
def test_criterion_4_default_sweep():
    start = time.monotonic()
    result = sweep(SweepGrid())
    assert len(result.rows) == 101
    assert result.max_disagreement <= TOL
    for row in result.rows:
        t = row.theta
        assert abs(row.f1_direct - math.cos(2 * t) ** 2) <= TOL
        assert abs(row.f2_direct - math.cos(t) ** 6) <= TOL
        assert abs(row.f_scheme - 1.0) <= TOL
        assert abs(row.p1_passive - math.cos(t) ** 4) <= TOL
        assert abs(row.p2_passive - math.cos(t) ** 6) <= TOL
    quarter, half = result.rows[25], result.rows[50]
    assert abs(quarter.theta - math.pi / 4) <= 1e-12
    assert abs(half.theta - math.pi / 2) <= 1e-12
    assert abs(quarter.f1_direct - 0.0) <= TOL
    assert abs(half.f1_direct - 1.0) <= TOL
    assert abs(quarter.p1_passive - 0.25) <= TOL
    assert abs(quarter.p2_passive - 0.125) <= TOL
    elapsed = time.monotonic() - start
    assert elapsed < 5.0, f"runtime target missed: {elapsed:.1f}s"


@criterion("criterion 5: active path patterns are complete and loss-scaled")
def test_criterion_5_active_completeness():
    rng = np.random.default_rng(5005)
    for n in (2, 3, 4):
        for _ in range(20):
            thetas = random_thetas(rng, n)
            coeffs = random_coefficients(rng)
            out = run_active(ProtocolSpec(n, coeffs, Variant.ACTIVE_PC, thetas))
            total = sum(b.probability for b in out.branches.values())
            assert abs(total - 1.0) <= TOL
            assert abs(out.total_success_probability - 1.0) <= TOL
    lossy2 = run_active(
        ProtocolSpec(2, PHI_MINUS, Variant.ACTIVE_PC, (0.4, 1.3), eta=0.988)
    )
    assert abs(lossy2.total_success_probability - 0.976144) <= TOL
    lossy3 = run_active(
        ProtocolSpec(3, PHI_MINUS, Variant.ACTIVE_PC, (0.4, 1.3, -0.7), eta=0.988)
    )
    assert abs(lossy3.total_success_probability - 0.964430272) <= TOL


@criterion("criterion 6: the path-phase correction is load-bearing")
def test_criterion_6_phase_flip_regression():
    rng = np.random.default_rng(6006)
    for _ in range(40):
        n = int(rng.integers(2, 5))
        thetas = random_thetas(rng, n)
        coeffs = random_coefficients(rng)
        spec = ProtocolSpec(n, coeffs, Variant.ACTIVE_PC, thetas)
        flipped = abs(abs(coeffs.alpha) ** 2 - abs(coeffs.beta) ** 2) ** 2
        without = run_active_without_correction(spec)
        for pattern, branch in without.branches.items():
            odd = sum(1 for p in pattern if p == 1) % 2 == 1
            expected = flipped if odd else 1.0
            assert abs(branch.fidelity - expected) <= TOL
        with_correction = run_active(spec)
        for branch in with_correction.branches.values():
            assert abs(branch.fidelity - 1.0) <= TOL
    # equal-weight coefficients: the uncorrected odd branches are orthogonal
    out = run_active_without_correction(
        ProtocolSpec(2, PHI_MINUS, Variant.ACTIVE_PC, (0.5, 1.1))
    )
    assert abs(out.branches[(1, 2)].fidelity) <= TOL
    assert abs(out.branches[(2, 1)].fidelity) <= TOL


@criterion("criterion 7: sparse evolution matches the dense engine")
def test_criterion_7_dense_equivalence():
    rng = np.random.default_rng(7007)
    for trial in range(100):
        n = 2 + trial % 3  # covers 2, 3, 4 photons
        state = random_state(rng, n)
        vec = dense.state_vector(state)
        depth = int(rng.integers(3, 7))
        for _ in range(depth):
            idx = int(rng.integers(0, n))
            mat = haar_unitary(rng, dense.N_MODES)
            state = apply_single_photon_map(state, idx, ModeMap.from_matrix("haar", mat))
            vec = dense.apply_one_photon(vec, n, idx, mat)
        assert dense.max_amplitude_diff(state, vec) <= TOL


@criterion("criterion 8: property suite (unitarity, composition, symmetry)")
def test_criterion_8_properties():
    rng = np.random.default_rng(8008)

    # unitarity of every element map on 1000 random states each
    elements = [
        ("rotation", lambda: rotation_map(float(rng.uniform(-2 * math.pi, 2 * math.pi)))),
        ("tag_v", tag_v),
        ("tag_h", tag_h),
        ("decoder", active_decoder_map),
        ("sigma_z", sigma_z_path1),
    ]
    for _name, make_map in elements:
        for _ in range(1000):
            mode_map = make_map()
            allowed = tuple(m for m in MODES if m not in mode_map.forbidden)
            s = random_state(rng, 1, allowed_modes=allowed, max_terms=4)
            out = apply_single_photon_map(s, 0, mode_map)
            assert abs(norm_squared(out) - norm_squared(s)) <= TOL

    # rotation composition law
    for _ in range(200):
        t1, t2 = rng.uniform(-math.pi, math.pi, 2)
        s = random_state(rng, 1)
        stepped = apply_single_photon_map(
            apply_single_photon_map(s, 0, rotation_map(t1)), 0, rotation_map(t2)
        )
        combined = apply_single_photon_map(s, 0, rotation_map(t1 + t2))
        kets = set(stepped.amplitudes) | set(combined.amplitudes)
        for ket in kets:
            delta = stepped.amplitudes.get(ket, 0j) - combined.amplitudes.get(ket, 0j)
            assert abs(delta) <= TOL

    # herald-probability completeness across variants
    for variant in Variant:
        for _ in range(25):
            n = int(rng.integers(2, 5))
            spec = ProtocolSpec(
                n, random_coefficients(rng), variant, random_thetas(rng, n)
            )
            if variant == Variant.PASSIVE_DIRECT:
                out = run_passive_direct(spec)
            elif variant == Variant.PASSIVE_TAGGED:
                out = run_passive_tagged(spec)
            else:
                out = run_active(spec)
            total = sum(b.probability for b in out.branches.values())
            assert abs(total - 1.0) <= TOL

    # sweep columns symmetric under theta -> pi - theta
    rows = sweep(SweepGrid()).rows
    for left, right in zip(rows, reversed(rows)):
        for a, b in zip(left.values()[1:], right.values()[1:]):
            assert abs(a - b) <= TOL
