"""Exception types shared across the simulation modules."""


class GeometryError(ValueError):
    """Invalid source/detector arrangement (overlap, zero separation)."""


class NormalizationError(ValueError):
    """Momentum amplitude cannot be normalized (zero or non-integrable)."""


class ScenarioError(ValueError):
    """A scenario or sweep file failed validation.

    `field` names the offending key, e.g. "coupling.k".
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class IntegrationError(RuntimeError):
    """A numerical integral failed to converge.

    Carries the residual `estimate` (and the best `value`, when one exists)
    so callers can decide whether to retry at higher resolution.
    """

    def __init__(self, message: str, estimate: float | None = None,
                 value: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.value = value
