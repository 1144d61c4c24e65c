"""Exception and warning types shared across the package."""


class MeshnnError(Exception):
    """Base class for all errors raised by this package."""


# -- meshes -------------------------------------------------------------

class EmptyMesh(MeshnnError):
    """No triangle survived clipping against the domain."""


class InvalidStep(MeshnnError):
    """Nonpositive target stepsize."""


class DegenerateElement(MeshnnError):
    """A triangle has zero area."""


class ParseError(MeshnnError):
    """Malformed mesh/model/config file; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvariantViolation(MeshnnError):
    """A loaded or constructed object fails its structural invariants."""


# -- layers and models --------------------------------------------------

class InvalidDim(MeshnnError):
    """Layer dimension below 1."""


class DimMismatch(MeshnnError):
    """Input/output dimensions do not chain."""


class ArchSpecError(MeshnnError):
    """Malformed architecture description; carries the stanza index."""

    def __init__(self, message, stanza=None):
        if stanza is not None:
            message = f"stanza {stanza}: {message}"
        super().__init__(message)
        self.stanza = stanza


# -- training -----------------------------------------------------------

class ZeroTarget(MeshnnError):
    """A relative error was requested against a zero-norm target."""


class NonFiniteLoss(MeshnnError):
    """Loss became NaN/inf during training; carries the epoch index."""

    def __init__(self, message, epoch=None):
        if epoch is not None:
            message = f"epoch {epoch}: {message}"
        super().__init__(message)
        self.epoch = epoch


# -- random fields ------------------------------------------------------

class EigFailure(MeshnnError):
    """Eigenvalue iteration did not converge."""


# -- operators ----------------------------------------------------------

class EmptyBoundary(MeshnnError):
    """No boundary sample satisfies the truncation constraint."""


class NewtonDiverged(MeshnnError):
    """Newton iteration failed to reduce the residual."""


# -- vascular -----------------------------------------------------------

class TooFewPoints(MeshnnError):
    """Voronoi generation requires at least two points."""


class SingularSystem(MeshnnError):
    """Direct solve of the oxygen system produced non-finite values."""


# -- cli ----------------------------------------------------------------

class ConfigError(MeshnnError):
    """Bad run configuration (unknown key, missing file, bad value)."""


class EmptyPatternWarning(UserWarning):
    """Support pattern has zero entries; the layer is constructible but untrainable."""
