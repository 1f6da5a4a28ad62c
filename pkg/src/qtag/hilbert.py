"""Sparse pure states for N photons carrying polarization, time-bin, and
path labels.

A state is a map from basis kets (one :class:`PhotonMode` per party) to
complex amplitudes.  The single-photon mode space has 2 polarizations x 3
time bins x 2 output paths = 12 modes.  Optical elements act as sparse
single-photon linear maps (:class:`ModeMap`) applied photon by photon.

All values are immutable after construction and every operation is a pure
function, so states can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from numbers import Number
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

from .errors import (
    DegenerateStateError,
    DimensionError,
    EntangledRegisterError,
    ProtocolMisuseError,
)

__all__ = [
    "Polarization",
    "Path",
    "PhotonMode",
    "BasisKet",
    "PureState",
    "ModeMap",
    "MODES",
    "MODE_INDEX",
    "DEFAULT_PATH",
    "MAX_TIME_BIN",
    "PRUNE_THRESHOLD",
    "DEGENERATE_NORM_SQUARED",
    "basis_ket",
    "basis_state",
    "zero_state",
    "inner_product",
    "norm_squared",
    "is_normalized",
    "normalize",
    "apply_single_photon_map",
    "project",
    "fidelity_polarization",
]

# Amplitudes below this are dropped at state construction; well below every
# tolerance used by the verification suite.
PRUNE_THRESHOLD = 1e-14

# norm_squared at or below this cannot be normalized: it signals
# post-selection on a zero-probability branch rather than rounding noise.
DEGENERATE_NORM_SQUARED = 1e-12

# Delays only accrue once at the sender and once at the receiver.
MAX_TIME_BIN = 2


class Polarization(IntEnum):
    """Horizontal or vertical polarization in the local reference frame."""

    H = 0
    V = 1


class Path(IntEnum):
    """Decoder output path; path 2 is the straight-through default."""

    ONE = 1
    TWO = 2


# Photons carry the straight-through label until an active decoder routes them.
DEFAULT_PATH = Path.TWO


class PhotonMode(NamedTuple):
    """One photon's (polarization, time-bin, path) label."""

    pol: Polarization
    bin: int
    path: Path = DEFAULT_PATH

    def label(self) -> str:
        """Compact label such as ``H``, ``V_T``, or ``H_TT^1``."""
        sup = "" if self.path == DEFAULT_PATH else f"^{int(self.path)}"
        return f"{self.pol.name}{'_T' * self.bin}{sup}"


BasisKet = tuple  # tuple[PhotonMode, ...], one entry per party

# Canonical ordering of the 12 single-photon modes: lexicographic over
# (pol, bin, path).  Basis kets sort the same way, so state equality is
# structural.
MODES: tuple[PhotonMode, ...] = tuple(
    PhotonMode(pol, b, path)
    for pol in Polarization
    for b in range(MAX_TIME_BIN + 1)
    for path in Path
)
MODE_INDEX: Mapping[PhotonMode, int] = {m: i for i, m in enumerate(MODES)}


def _check_ket(ket: BasisKet, n_photons: int) -> None:
    if len(ket) != n_photons:
        raise DimensionError(
            f"basis ket has {len(ket)} photons, state expects {n_photons}"
        )
    for mode in ket:
        if not 0 <= mode.bin <= MAX_TIME_BIN:
            raise DimensionError(f"time bin {mode.bin} outside [0, {MAX_TIME_BIN}]")


@dataclass(frozen=True, init=False)
class PureState:
    """Sparse N-photon pure state.

    ``amplitudes`` maps basis kets to complex amplitudes; terms below
    :data:`PRUNE_THRESHOLD` are dropped and the remaining kets are stored in
    canonical order.  Instances are immutable; arithmetic returns new states.
    """

    n_photons: int
    amplitudes: Mapping[BasisKet, complex]

    def __init__(self, n_photons: int, amplitudes: Mapping[BasisKet, complex]):
        if n_photons < 1:
            raise DimensionError("a state needs at least one photon")
        clean: dict[BasisKet, complex] = {}
        for ket in sorted(amplitudes):
            _check_ket(ket, n_photons)
            amp = complex(amplitudes[ket])
            if abs(amp) >= PRUNE_THRESHOLD:
                clean[ket] = amp
        object.__setattr__(self, "n_photons", n_photons)
        object.__setattr__(self, "amplitudes", clean)

    def terms(self) -> Iterable[tuple[BasisKet, complex]]:
        """Iterate (ket, amplitude) pairs in canonical order."""
        return self.amplitudes.items()

    def __add__(self, other: "PureState") -> "PureState":
        if not isinstance(other, PureState):
            return NotImplemented
        if other.n_photons != self.n_photons:
            raise DimensionError("cannot add states with different photon counts")
        merged = dict(self.amplitudes)
        for ket, amp in other.amplitudes.items():
            merged[ket] = merged.get(ket, 0j) + amp
        return PureState(self.n_photons, merged)

    def __sub__(self, other: "PureState") -> "PureState":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "PureState":
        if not isinstance(scalar, Number):
            return NotImplemented
        return PureState(
            self.n_photons, {k: v * scalar for k, v in self.amplitudes.items()}
        )

    __rmul__ = __mul__

    def __neg__(self) -> "PureState":
        return (-1.0) * self

    def __str__(self) -> str:
        if not self.amplitudes:
            return "0"
        parts = []
        for ket, amp in self.amplitudes.items():
            label = " ".join(m.label() for m in ket)
            parts.append(f"({amp:.6g})|{label}>")
        return " + ".join(parts)


def basis_ket(
    pols: str | Sequence[Polarization],
    bins: Sequence[int] | None = None,
    paths: Sequence[Path | int] | None = None,
) -> BasisKet:
    """Build a basis ket from per-photon labels.

    ``pols`` may be a string like ``"HVH"``; ``bins`` and ``paths`` default
    to 0 and the straight-through path.
    """
    if isinstance(pols, str):
        try:
            pol_list = [Polarization[c] for c in pols]
        except KeyError as exc:
            raise ValueError(f"unknown polarization letter {exc.args[0]!r}") from None
    else:
        pol_list = list(pols)
    n = len(pol_list)
    bin_list = [0] * n if bins is None else list(bins)
    path_list = [DEFAULT_PATH] * n if paths is None else [Path(p) for p in paths]
    if len(bin_list) != n or len(path_list) != n:
        raise DimensionError("pols, bins, and paths must have equal lengths")
    return tuple(
        PhotonMode(pol, b, path) for pol, b, path in zip(pol_list, bin_list, path_list)
    )


def basis_state(
    pols: str | Sequence[Polarization],
    bins: Sequence[int] | None = None,
    paths: Sequence[Path | int] | None = None,
    amplitude: complex = 1.0,
) -> PureState:
    """Single-ket state with the given amplitude."""
    ket = basis_ket(pols, bins, paths)
    return PureState(len(ket), {ket: amplitude})


def zero_state(n_photons: int) -> PureState:
    """The zero vector (empty amplitude map)."""
    return PureState(n_photons, {})


def inner_product(a: PureState, b: PureState) -> complex:
    """<a|b> with the conjugate on the left argument.

    Conjugate-symmetric: ``inner_product(a, b) == conj(inner_product(b, a))``.
    """
    if a.n_photons != b.n_photons:
        raise DimensionError(
            f"photon-count mismatch: {a.n_photons} vs {b.n_photons}"
        )
    # iterate the smaller map
    if len(a.amplitudes) <= len(b.amplitudes):
        pairs = ((amp, b.amplitudes.get(ket)) for ket, amp in a.amplitudes.items())
        return sum((amp.conjugate() * other for amp, other in pairs if other is not None), 0j)
    return inner_product(b, a).conjugate()


def norm_squared(s: PureState) -> float:
    """Sum of squared amplitude magnitudes."""
    return sum(v.real * v.real + v.imag * v.imag for v in s.amplitudes.values())


def is_normalized(s: PureState, tol: float = 1e-12) -> bool:
    return abs(norm_squared(s) - 1.0) <= tol


def normalize(s: PureState) -> PureState:
    """Rescale to unit norm.

    Raises :class:`DegenerateStateError` when the norm is at or below the
    degenerate threshold, which signals post-selection on a branch of zero
    probability.
    """
    ns = norm_squared(s)
    if ns <= DEGENERATE_NORM_SQUARED:
        raise DegenerateStateError(
            f"cannot normalize state with norm_squared = {ns:.3e}"
        )
    scale = 1.0 / math.sqrt(ns)
    return PureState(s.n_photons, {k: v * scale for k, v in s.amplitudes.items()})


@dataclass(frozen=True)
class ModeMap:
    """Sparse linear map on the single-photon mode space.

    ``rules`` gives, for each declared input mode, its image as
    (coefficient, output mode) terms.  Modes outside the declared domain
    pass through unchanged; modes in ``forbidden`` raise
    :class:`ProtocolMisuseError` when encountered.
    """

    name: str
    rules: Mapping[PhotonMode, tuple[tuple[complex, PhotonMode], ...]]
    forbidden: frozenset = frozenset()

    @classmethod
    def from_matrix(cls, name: str, matrix) -> "ModeMap":
        """Build a map from a dense matrix over the canonical mode order.

        ``matrix[i][j]`` is the coefficient of ``MODES[i]`` in the image of
        ``MODES[j]``.
        """
        n = len(MODES)
        if len(matrix) != n or any(len(row) != n for row in matrix):
            raise DimensionError(f"mode matrix must be {n}x{n}")
        rules = {}
        for j, mode_in in enumerate(MODES):
            image = tuple(
                (complex(matrix[i][j]), MODES[i])
                for i in range(n)
                if abs(complex(matrix[i][j])) >= PRUNE_THRESHOLD
            )
            rules[mode_in] = image
        return cls(name, rules)


def apply_single_photon_map(
    s: PureState, photon_index: int, mode_map: ModeMap
) -> PureState:
    """Apply a single-photon linear map to one photon of a state.

    Amplitudes transform ket by ket (linearity); kets whose target photon
    is outside the map's declared domain pass through unchanged.
    """
    if not 0 <= photon_index < s.n_photons:
        raise DimensionError(
            f"photon index {photon_index} outside [0, {s.n_photons})"
        )
    out: dict[BasisKet, complex] = {}
    for ket, amp in s.amplitudes.items():
        mode = ket[photon_index]
        if mode in mode_map.forbidden:
            raise ProtocolMisuseError(
                f"{mode_map.name} is undefined on input mode {mode.label()}"
            )
        rule = mode_map.rules.get(mode)
        if rule is None:
            out[ket] = out.get(ket, 0j) + amp
            continue
        head, tail = ket[:photon_index], ket[photon_index + 1 :]
        for coeff, new_mode in rule:
            new_ket = head + (new_mode,) + tail
            out[new_ket] = out.get(new_ket, 0j) + coeff * amp
    return PureState(s.n_photons, out)


def project(
    s: PureState, predicate: Callable[[BasisKet], bool]
) -> tuple[PureState, float]:
    """Restrict to kets satisfying ``predicate``.

    Returns the unnormalized projected state and its probability (its
    norm-squared).  A zero-probability projection returns the zero state
    with probability 0.
    """
    kept = {k: v for k, v in s.amplitudes.items() if predicate(k)}
    projected = PureState(s.n_photons, kept)
    return projected, norm_squared(projected)


def _register_label(ket: BasisKet) -> tuple:
    return tuple((m.bin, m.path) for m in ket)


def _polarization_part(
    s: PureState, what: str
) -> dict[tuple[Polarization, ...], complex]:
    """Amplitudes keyed by polarization sequence, if the time-bin/path
    registers factor out as one common product label across all kets."""
    registers = {_register_label(ket) for ket in s.amplitudes}
    if len(registers) > 1:
        raise EntangledRegisterError(
            f"{what} has no common time-bin/path label across its kets; "
            "polarization fidelity is ill-defined"
        )
    return {tuple(m.pol for m in ket): amp for ket, amp in s.amplitudes.items()}


def fidelity_polarization(s: PureState, target: PureState) -> float:
    """Squared overlap of the polarization part of ``s`` with ``target``.

    Both states must carry a single common time-bin/path product label
    across all retained kets (checked, not assumed); the labels themselves
    are then ignored and only polarization amplitudes enter the overlap.
    """
    if s.n_photons != target.n_photons:
        raise DimensionError(
            f"photon-count mismatch: {s.n_photons} vs {target.n_photons}"
        )
    pol_s = _polarization_part(s, "state")
    pol_t = _polarization_part(target, "target")
    overlap = 0j
    for pols, amp in pol_s.items():
        t_amp = pol_t.get(pols)
        if t_amp is not None:
            overlap += t_amp.conjugate() * amp
    return abs(overlap) ** 2
