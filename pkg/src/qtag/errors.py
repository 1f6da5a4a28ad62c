"""Exception types shared across the package."""


class QtagError(Exception):
    """Base class for all qtag errors."""


class DimensionError(QtagError):
    """Photon counts, indices, or array shapes do not line up."""


class DegenerateStateError(QtagError):
    """A (near-)zero-norm state where a normalizable one is required.

    Raised when post-selecting on a branch that carries no probability.
    """


class ProtocolMisuseError(QtagError):
    """An optical element was fed input it is not defined for."""


class EntangledRegisterError(QtagError):
    """Time-bin/path labels do not factor out of the polarization state."""


class SpecError(QtagError):
    """Invalid protocol, grid, or coefficient parameters."""


class UsageError(QtagError):
    """Bad command-line or config-file input."""
