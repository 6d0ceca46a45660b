"""Exception types shared across the simulator."""

from __future__ import annotations


class USCKDError(ValueError):
    """Base class for invalid-input errors raised by the library."""


class PreconditionError(USCKDError):
    """A numerical precondition was violated (sampling, schedule timing, ...).

    The CLI maps this to exit code 2.
    """


class UndersampledError(PreconditionError):
    def __init__(self, sample_rate: float, max_detune: float):
        self.sample_rate = sample_rate
        self.max_detune = max_detune
        super().__init__(
            f"undersampled: sample_rate={sample_rate!r} Hz must exceed "
            f"4*max|detune|={4 * max_detune!r} Hz"
        )


class CalibrationError(PreconditionError):
    def __init__(self, target: float, best: float, sigma: float):
        self.target = target
        self.best = best
        self.sigma = sigma
        super().__init__(
            f"unattainable target RMS {target!r}; best achieved {best!r} "
            f"at sigma_per_sample={sigma!r}"
        )
