"""Exception hierarchy shared by all shearwave modules."""


class ShearwaveError(Exception):
    """Base class for every error raised by the package."""

    code = "error"

    def to_record(self):
        return {"error": self.code, "type": type(self).__name__, "message": str(self)}


class ProfileError(ShearwaveError, ValueError):
    code = "invalid_profile"


class ParameterError(ShearwaveError, ValueError):
    code = "invalid_parameter"


class IntegrationFailure(ShearwaveError, RuntimeError):
    code = "integration_failure"


class BoundViolation(ShearwaveError, RuntimeError):
    code = "bound_violation"


class ZeroFirstComponent(ShearwaveError, ValueError):
    code = "zero_first_component"


class NotCapillary(ShearwaveError, ValueError):
    code = "not_capillary"


class AliasError(ShearwaveError, ValueError):
    code = "alias"


class ShapeMismatch(ShearwaveError, ValueError):
    code = "shape_mismatch"


class DegenerateSurface(ShearwaveError, ValueError):
    code = "degenerate_surface"


class SymmetryViolation(ShearwaveError, ValueError):
    code = "symmetry_violation"


class NonResonantMode(ShearwaveError, ValueError):
    code = "non_resonant_mode"


class ConfigError(ShearwaveError, ValueError):
    """Schema violation in a run configuration; ``path`` names the offending field."""

    code = "config"

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path

    def to_record(self):
        rec = super().to_record()
        rec["path"] = self.path
        return rec
