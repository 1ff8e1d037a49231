"""Exception types raised by cvpurify."""


class CVPurifyError(ValueError):
    """Base class for all cvpurify errors."""


class HeisenbergViolationError(CVPurifyError):
    """Quadrature variances violate vx * vp >= 1 (shot-noise units)."""


class EmptySelectionError(CVPurifyError):
    """A trigger threshold kept no samples."""


class SurvivorStarvationError(CVPurifyError):
    """An iterated purification round ran out of survivors."""

    def __init__(self, round_index, survivors, required):
        self.round_index = round_index
        self.survivors = survivors
        self.required = required
        super().__init__(
            f"round {round_index}: {survivors} survivors, at least {required} required"
        )


class InfeasibleCalibrationError(CVPurifyError):
    """No antisqueezing variance reproduces the requested variance product."""


class SparseBinError(CVPurifyError):
    """A histogram bin has too few expected counts for a chi-square test."""


class GridCoverageError(CVPurifyError):
    """A phase-space grid is too small or too coarse for its content."""


class ConfigError(CVPurifyError):
    """Malformed or inconsistent experiment configuration."""
