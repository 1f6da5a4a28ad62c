"""Closed-form evaluators, misalignment-angle sweeps, and the
cross-verification harness.

The closed forms evaluate every analytic fidelity/efficiency expression of
the transmission schemes.  :func:`sweep` runs the simulated pipelines and
the closed forms side by side over a theta grid and records their
disagreement per row.  :func:`verify` samples random protocol parameters
and checks the sparse engine against both the dense reference engine and
the closed forms.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import dense
from .errors import SpecError
from .protocols import (
    PHI_MINUS,
    ProtocolSpec,
    SourceCoefficients,
    Variant,
    run_active,
    run_active_without_correction,
    run_passive_direct,
    run_passive_tagged,
    evolve_active,
    evolve_passive_direct,
    evolve_passive_tagged,
)

__all__ = [
    "SWEEP_COLUMNS",
    "DEFAULT_TOLERANCE",
    "THREADS_ENV_VAR",
    "closed_form_f1",
    "closed_form_f2",
    "closed_form_p_passive",
    "closed_form_p_active_branch",
    "closed_form_loss",
    "SweepGrid",
    "SweepRow",
    "SweepResult",
    "sweep",
    "VerifyReport",
    "verify",
    "verify_parameters",
]

SWEEP_COLUMNS = (
    "theta",
    "F1_direct",
    "F2_direct",
    "F_scheme",
    "P1_passive",
    "P2_passive",
    "P_active_total",
)

DEFAULT_TOLERANCE = 1e-12

# Optional cap on sweep parallelism; unset or 1 means serial evaluation.
THREADS_ENV_VAR = "QTAG_THREADS"


def closed_form_f1(theta_a: float, theta_b: float, coeffs: SourceCoefficients) -> float:
    """Two-party direct-transmission fidelity.

    |cos(ta) cos(tb) + sin(ta) sin(tb) (conj(beta) alpha + conj(alpha) beta)|^2
    """
    a, b = coeffs.alpha, coeffs.beta
    cross = b.conjugate() * a + a.conjugate() * b
    amp = math.cos(theta_a) * math.cos(theta_b) + math.sin(theta_a) * math.sin(
        theta_b
    ) * cross
    return abs(amp) ** 2


def closed_form_f2(
    theta_a: float, theta_b: float, theta_c: float, coeffs: SourceCoefficients
) -> float:
    """Three-party direct-transmission fidelity.

    |l1 + l8 (conj(beta) alpha - conj(alpha) beta)|^2 with l1 the product of
    cosines and l8 the product of sines.
    """
    a, b = coeffs.alpha, coeffs.beta
    l1 = math.cos(theta_a) * math.cos(theta_b) * math.cos(theta_c)
    l8 = math.sin(theta_a) * math.sin(theta_b) * math.sin(theta_c)
    cross = b.conjugate() * a - a.conjugate() * b
    return abs(l1 + l8 * cross) ** 2


def closed_form_p_passive(thetas) -> float:
    """Accepted probability of the tagged scheme: prod(cos^2 theta_i)."""
    p = 1.0
    for t in thetas:
        p *= math.cos(t) ** 2
    return p


def closed_form_p_active_branch(thetas, pattern) -> float:
    """Probability of one active path pattern.

    Straight-through photons (path 2) contribute cos^2, deflected photons
    (path 1) contribute sin^2.
    """
    if len(pattern) != len(thetas):
        raise SpecError(f"{len(pattern)} path labels for {len(thetas)} angles")
    p = 1.0
    for t, out in zip(thetas, pattern):
        if int(out) == 2:
            p *= math.cos(t) ** 2
        elif int(out) == 1:
            p *= math.sin(t) ** 2
        else:
            raise SpecError(f"path labels must be 1 or 2, got {out!r}")
    return p


def closed_form_loss(eta: float, n: int) -> float:
    """Gated-cell survival factor eta^n on the active success probability."""
    if not 0.0 <= eta <= 1.0:
        raise SpecError(f"eta must lie in [0, 1], got {eta!r}")
    if n < 1:
        raise SpecError(f"photon count must be at least 1, got {n}")
    return eta**n


@dataclass(frozen=True)
class SweepGrid:
    """Uniform theta grid with every party tied to the same angle."""

    theta_min: float = 0.0
    theta_max: float = math.pi
    steps: int = 101
    coeffs: SourceCoefficients = PHI_MINUS
    eta: float = 1.0
    tie_angles: bool = True

    def __post_init__(self):
        if not self.theta_min < self.theta_max:
            raise SpecError(
                f"theta_min {self.theta_min!r} must be below theta_max {self.theta_max!r}"
            )
        if self.steps < 2:
            raise SpecError(f"steps must be at least 2, got {self.steps}")
        if not 0.0 <= self.eta <= 1.0:
            raise SpecError(f"eta must lie in [0, 1], got {self.eta!r}")
        if not self.tie_angles:
            raise SpecError("only the tied-angle sweep convention is supported")

    def thetas(self) -> tuple[float, ...]:
        return tuple(
            float(t) for t in np.linspace(self.theta_min, self.theta_max, self.steps)
        )


@dataclass(frozen=True)
class SweepRow:
    """One grid row; the active column uses the two-party circuit."""

    theta: float
    f1_direct: float
    f2_direct: float
    f_scheme: float
    p1_passive: float
    p2_passive: float
    p_active_total: float

    def values(self) -> tuple[float, ...]:
        return (
            self.theta,
            self.f1_direct,
            self.f2_direct,
            self.f_scheme,
            self.p1_passive,
            self.p2_passive,
            self.p_active_total,
        )


@dataclass(frozen=True)
class SweepResult:
    """Simulated and closed-form row families plus their per-row gap."""

    grid: SweepGrid
    simulated: tuple[SweepRow, ...]
    closed_form: tuple[SweepRow, ...]
    disagreement: tuple[float, ...]

    @property
    def rows(self) -> tuple[SweepRow, ...]:
        """The simulated family (what the CSV serializer emits)."""
        return self.simulated

    @property
    def max_disagreement(self) -> float:
        return max(self.disagreement)


def _sweep_row(grid: SweepGrid, theta: float) -> tuple[SweepRow, SweepRow]:
    coeffs = grid.coeffs
    direct2 = run_passive_direct(
        ProtocolSpec(2, coeffs, Variant.PASSIVE_DIRECT, (theta, theta))
    )
    direct3 = run_passive_direct(
        ProtocolSpec(3, coeffs, Variant.PASSIVE_DIRECT, (theta,) * 3)
    )
    tagged2 = run_passive_tagged(
        ProtocolSpec(2, coeffs, Variant.PASSIVE_TAGGED, (theta, theta))
    )
    tagged3 = run_passive_tagged(
        ProtocolSpec(3, coeffs, Variant.PASSIVE_TAGGED, (theta,) * 3)
    )
    active2 = run_active(
        ProtocolSpec(2, coeffs, Variant.ACTIVE_PC, (theta, theta), eta=grid.eta)
    )
    simulated = SweepRow(
        theta=theta,
        f1_direct=direct2.overall_fidelity_of_accepted,
        f2_direct=direct3.overall_fidelity_of_accepted,
        f_scheme=tagged2.overall_fidelity_of_accepted,
        p1_passive=tagged2.total_success_probability,
        p2_passive=tagged3.total_success_probability,
        p_active_total=active2.total_success_probability,
    )
    closed = SweepRow(
        theta=theta,
        f1_direct=closed_form_f1(theta, theta, coeffs),
        f2_direct=closed_form_f2(theta, theta, theta, coeffs),
        f_scheme=1.0,
        p1_passive=closed_form_p_passive((theta, theta)),
        p2_passive=closed_form_p_passive((theta,) * 3),
        p_active_total=closed_form_loss(grid.eta, 2),
    )
    return simulated, closed


def _thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise SpecError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")
    if cap < 1:
        raise SpecError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")
    return cap


def sweep(grid: SweepGrid) -> SweepResult:
    """Evaluate simulated pipelines and closed forms over the grid.

    Rows are independent; ``QTAG_THREADS`` caps parallel evaluation and the
    result preserves grid order either way.  The per-row disagreement is
    the largest absolute simulated-vs-closed-form gap across value columns
    (a single-point sign error must fail loudly, so no averaging).
    """
    thetas = grid.thetas()
    cap = _thread_cap()
    if cap > 1:
        with ThreadPoolExecutor(max_workers=cap) as pool:
            pairs = list(pool.map(lambda t: _sweep_row(grid, t), thetas))
    else:
        pairs = [_sweep_row(grid, t) for t in thetas]
    simulated = tuple(p[0] for p in pairs)
    closed = tuple(p[1] for p in pairs)
    disagreement = tuple(
        max(abs(a - b) for a, b in zip(s.values()[1:], c.values()[1:]))
        for s, c in zip(simulated, closed)
    )
    return SweepResult(grid, simulated, closed, disagreement)


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of the randomized cross-verification run."""

    trials: int
    seed: int
    tolerance: float
    max_disagreement: float
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures and self.max_disagreement <= self.tolerance


def verify_parameters(
    n: int,
    thetas,
    coeffs: SourceCoefficients,
    eta: float = 1.0,
    use_path_correction: bool = True,
) -> float:
    """Largest disagreement for one parameter set.

    Runs all three pipelines and compares: sparse final states against the
    dense engine, headline probabilities/fidelities against the closed
    forms, and herald completeness against unity.  ``use_path_correction``
    is a mutation hook: disabling it simulates a broken phase-flip
    correction, which the harness must flag.
    """
    thetas = tuple(float(t) for t in thetas)
    worst = 0.0

    def check(value: float, expected: float) -> None:
        nonlocal worst
        worst = max(worst, abs(value - expected))

    # direct transmission
    spec = ProtocolSpec(n, coeffs, Variant.PASSIVE_DIRECT, thetas)
    out = run_passive_direct(spec)
    check(dense.max_amplitude_diff(evolve_passive_direct(spec), dense.passive_direct_vector(spec)), 0.0)
    check(out.total_success_probability, 1.0)
    if n == 2:
        check(out.overall_fidelity_of_accepted, closed_form_f1(*thetas, coeffs))
    elif n == 3:
        check(out.overall_fidelity_of_accepted, closed_form_f2(*thetas, coeffs))

    # tagged transmission
    spec = ProtocolSpec(n, coeffs, Variant.PASSIVE_TAGGED, thetas)
    out = run_passive_tagged(spec)
    check(dense.max_amplitude_diff(evolve_passive_tagged(spec), dense.passive_tagged_vector(spec)), 0.0)
    check(out.total_success_probability, closed_form_p_passive(thetas))
    check(out.overall_fidelity_of_accepted, 1.0)
    check(sum(b.probability for b in out.branches.values()), 1.0)

    # active transmission (the dense reference always applies the correction)
    spec = ProtocolSpec(n, coeffs, Variant.ACTIVE_PC, thetas, eta=eta)
    runner = run_active if use_path_correction else run_active_without_correction
    out = runner(spec)
    check(
        dense.max_amplitude_diff(
            evolve_active(spec, correct_path_phase=use_path_correction),
            dense.active_vector(spec),
        ),
        0.0,
    )
    for pattern, branch in out.branches.items():
        check(branch.fidelity, 1.0)
        check(branch.probability, closed_form_p_active_branch(thetas, pattern))
    check(sum(b.probability for b in out.branches.values()), 1.0)
    check(out.total_success_probability, closed_form_loss(eta, n))
    return worst


def _random_coefficients(rng: np.random.Generator) -> SourceCoefficients:
    v = rng.normal(size=4)
    alpha = complex(v[0], v[1])
    beta = complex(v[2], v[3])
    norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    return SourceCoefficients(alpha / norm, beta / norm)


def verify(
    trials: int = 200,
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
    use_path_correction: bool = True,
) -> VerifyReport:
    """Randomized cross-verification of all engines and closed forms.

    Samples protocol parameters (2 to 4 parties, complex coefficients,
    arbitrary angles, random gated-cell transmission) and reports the
    largest disagreement.  Any trial above ``tolerance`` is recorded with
    its full parameter set.
    """
    if trials < 1:
        raise SpecError(f"trials must be at least 1, got {trials}")
    rng = np.random.default_rng(seed)
    failures = []
    worst = 0.0
    for trial in range(trials):
        n = int(rng.integers(2, 5))
        thetas = tuple(float(t) for t in rng.uniform(-2.0 * math.pi, 2.0 * math.pi, n))
        coeffs = _random_coefficients(rng)
        eta = float(rng.uniform(0.0, 1.0))
        gap = verify_parameters(
            n, thetas, coeffs, eta, use_path_correction=use_path_correction
        )
        worst = max(worst, gap)
        if gap > tolerance:
            failures.append(
                f"trial {trial}: n={n} thetas={thetas} alpha={coeffs.alpha} "
                f"beta={coeffs.beta} eta={eta} disagreement={gap:.3e}"
            )
    return VerifyReport(trials, seed, tolerance, worst, tuple(failures))
