"""Exception types shared across the package."""


class ModspecError(Exception):
    """Base class for all package-specific errors."""


class DegenerateBandError(ModspecError):
    """A sub-band carries no usable energy (all-zero or below the floor)."""

    def __init__(self, band_index=None, message=None):
        self.band_index = band_index
        if message is None:
            message = "degenerate band"
            if band_index is not None:
                message = "degenerate band %d" % band_index
        super().__init__(message)


class NumericalDegeneracyError(ModspecError):
    """Levinson recursion produced a reflection coefficient with |k| >= 1."""

    def __init__(self, stage, value):
        self.stage = stage
        self.value = value
        super().__init__(
            "reflection coefficient |k|=%.6g >= 1 at stage %d" % (abs(value), stage)
        )


class DegenerateDistributionError(ModspecError):
    """A value stream is constant, so no histogram range can be defined."""


class AlignmentError(ModspecError):
    """Label track does not cover the audio it is paired with."""

    def __init__(self, utterance, message):
        self.utterance = utterance
        super().__init__("%s: %s" % (utterance, message))


class WavFormatError(ModspecError):
    """WAV file is not readable as PCM 16-bit mono."""

    def __init__(self, path, offense):
        self.path = str(path)
        self.offense = offense
        super().__init__("%s: %s" % (path, offense))


class LabelFileError(ModspecError):
    """Label file is malformed or does not match the audio length."""


class WeightFileError(ModspecError):
    """Weight file is corrupt, has a wrong version, or wrong dimensions."""


class TrainingDivergedError(ModspecError):
    """Training loss became non-finite."""

    def __init__(self, epoch):
        self.epoch = epoch
        super().__init__("non-finite loss at epoch %d" % epoch)
