"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """An input violates a hypothesis the requested operation depends on."""


class ObstructionError(RuntimeError):
    """No admissible plan avoids the +inf arcs: the distance is +inf."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step
