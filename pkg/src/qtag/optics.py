"""Optical elements as single-photon mode maps.

The collective rotation mixes H and V identically on every photon of a
channel, modelling channel rotation plus reference-frame misalignment as
one effective angle.  The tag operations delay one polarization component
by a single time unit.  The active decoder is the net map of the receiver's
gated interferometer (polarizing splitter, time-gated polarization
flippers, then a horizontal-component delay): it routes every admissible
input to time bin 1 on one of two output paths, which is exactly why no
timing post-selection is needed in the active scheme.
"""

from __future__ import annotations

import math

from .errors import SpecError
from .hilbert import MAX_TIME_BIN, ModeMap, Path, PhotonMode, Polarization

__all__ = [
    "rotation_map",
    "tag_v",
    "tag_h",
    "active_decoder_map",
    "sigma_z_path1",
    "pc_loss_factor",
    "wrap_angle",
]

_H, _V = Polarization.H, Polarization.V
_ONE = (1 + 0j,)


def rotation_map(theta: float) -> ModeMap:
    """Collective polarization rotation by ``theta`` radians.

    H -> cos(theta) H + sin(theta) V and V -> -sin(theta) H + cos(theta) V
    on every time bin and path; norm-preserving.
    """
    if not math.isfinite(theta):
        raise SpecError(f"rotation angle must be finite, got {theta!r}")
    c, s = complex(math.cos(theta)), complex(math.sin(theta))
    rules = {}
    for b in range(MAX_TIME_BIN + 1):
        for p in Path:
            h, v = PhotonMode(_H, b, p), PhotonMode(_V, b, p)
            rules[h] = ((c, h), (s, v))
            rules[v] = ((-s, h), (c, v))
    return ModeMap(f"rotation({theta:.6g})", rules)


def tag_v() -> ModeMap:
    """Delay the vertical component by one time unit; horizontal untouched.

    A vertical component already carrying the maximum delay cannot be
    delayed again (protocol misuse).
    """
    rules = {}
    forbidden = set()
    for p in Path:
        for b in range(MAX_TIME_BIN):
            rules[PhotonMode(_V, b, p)] = ((1 + 0j, PhotonMode(_V, b + 1, p)),)
        forbidden.add(PhotonMode(_V, MAX_TIME_BIN, p))
    return ModeMap("T_V", rules, frozenset(forbidden))


def tag_h() -> ModeMap:
    """Mirror image of :func:`tag_v`: the horizontal component gains one
    time unit, vertical untouched."""
    rules = {}
    forbidden = set()
    for p in Path:
        for b in range(MAX_TIME_BIN):
            rules[PhotonMode(_H, b, p)] = ((1 + 0j, PhotonMode(_H, b + 1, p)),)
        forbidden.add(PhotonMode(_H, MAX_TIME_BIN, p))
    return ModeMap("T_H", rules, frozenset(forbidden))


def active_decoder_map() -> ModeMap:
    """Net mode map of the gated decoding circuit.

    Undelayed horizontal and singly delayed vertical components exit
    straight through (path 2); undelayed vertical and singly delayed
    horizontal components are flipped and deflected (path 1).  All outputs
    land in time bin 1 and the map is a bijection on its 4-mode domain.
    Doubly delayed or already-routed photons are outside the circuit's
    gating windows.
    """
    p1, p2 = Path.ONE, Path.TWO
    rules = {
        PhotonMode(_H, 0, p2): ((1 + 0j, PhotonMode(_H, 1, p2)),),
        PhotonMode(_V, 1, p2): ((1 + 0j, PhotonMode(_V, 1, p2)),),
        PhotonMode(_V, 0, p2): ((1 + 0j, PhotonMode(_H, 1, p1)),),
        PhotonMode(_H, 1, p2): ((1 + 0j, PhotonMode(_V, 1, p1)),),
    }
    forbidden = frozenset(
        [PhotonMode(pol, MAX_TIME_BIN, p2) for pol in Polarization]
        + [PhotonMode(pol, b, p1) for pol in Polarization for b in range(MAX_TIME_BIN + 1)]
    )
    return ModeMap("active_decoder", rules, forbidden)


def sigma_z_path1() -> ModeMap:
    """Phase flip (V -> -V) on photons exiting path 1; path 2 untouched.

    Cancels the path-dependent sign error left by the active decoder.
    """
    rules = {}
    for b in range(MAX_TIME_BIN + 1):
        h, v = PhotonMode(_H, b, Path.ONE), PhotonMode(_V, b, Path.ONE)
        rules[h] = ((1 + 0j, h),)
        rules[v] = ((-1 + 0j, v),)
    return ModeMap("sigma_z@path1", rules)


def pc_loss_factor(eta: float, n_photons: int) -> float:
    """Success-probability scale for ``n_photons`` photons, each crossing
    one symmetric pair of gated cells with transmission ``eta``.

    Multiplies the active protocol's success probability only; conditional
    fidelities are unaffected by the symmetric two-cell arrangement.
    """
    if not 0.0 <= eta <= 1.0:
        raise SpecError(f"transmission coefficient must lie in [0, 1], got {eta!r}")
    if n_photons < 1:
        raise SpecError(f"photon count must be at least 1, got {n_photons}")
    return eta**n_photons


def wrap_angle(theta: float) -> float:
    """Reduce an angle to [0, 2*pi) for reporting.

    Never applied before use: maps act on the angle exactly as given.
    """
    return theta % (2.0 * math.pi)
