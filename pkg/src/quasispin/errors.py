"""Exception types shared across the package."""


class QuasispinError(Exception):
    """Base class for all package-specific errors."""


class FrameInvalid(QuasispinError):
    """A direction set violates the zero-sum or isotropy condition."""

    def __init__(self, condition: str, residual: float):
        self.condition = condition
        self.residual = residual
        super().__init__(f"frame violates {condition} (residual {residual:.3e})")


class BadDirectionIndex(QuasispinError):
    """Direction index outside the frame, or tuple of wrong length."""


class BadDensityOperator(QuasispinError):
    """Matrix is not Hermitian / unit-trace within tolerance."""


class BadUnitary(QuasispinError):
    """Matrix is not unitary within tolerance."""


class BadTargets(QuasispinError):
    """Gate targets overlap, repeat, or fall outside the register."""


class BadEpsilon(QuasispinError):
    """Mixing parameter outside [0, 1]."""


class ShapeError(QuasispinError):
    """Operator and register dimensions do not match."""


class NegativeQuasiWeight(QuasispinError):
    """A weight went negative beyond tolerance: the state left the
    hidden-variable model's domain (typically epsilon above threshold)."""

    def __init__(self, index: int, value: float, detail: str = ""):
        self.index = index
        self.value = value
        msg = f"weight[{index}] = {value:.6e} is negative beyond tolerance"
        if detail:
            msg += f"; {detail}"
        super().__init__(msg)


class BadTrajectory(QuasispinError):
    """Trajectory is missing a requested snapshot."""


class CircuitSyntaxError(QuasispinError):
    """Unparseable circuit file line."""

    def __init__(self, path, line_no: int, detail: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {detail}")


class ConfigError(QuasispinError):
    """Invalid or inconsistent experiment configuration."""
