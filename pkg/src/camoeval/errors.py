"""Exception hierarchy shared by all camoeval modules."""


class CamoEvalError(Exception):
    """Base class for all camoeval errors."""


class MalformedImage(CamoEvalError):
    """PNG bytes that cannot be decoded."""


class UnsupportedFormat(CamoEvalError):
    """Input that is not a PNG byte stream."""


class EmptyImage(CamoEvalError):
    """An image with zero pixels, which cannot be histogrammed."""


class BinMismatch(CamoEvalError):
    """Histograms built with different quantization schemes."""


class BadWeights(CamoEvalError):
    """Merge weights that are negative or do not sum to one."""


class DegenerateImage(CamoEvalError):
    """An image too small to contain any co-occurring pixel pair."""


class TooFewPixels(CamoEvalError):
    """Fewer pixels than requested clusters."""


class EmptyHistogram(CamoEvalError):
    """A histogram with no mass to draw a palette from."""


class PaletteTooLarge(CamoEvalError):
    """More palette entries requested than occupied histogram bins."""


class EmptyPalette(CamoEvalError):
    """A pattern render without any palette entry."""


class NoPatches(CamoEvalError):
    """A pattern render without any donor patch."""


class BadSpec(CamoEvalError):
    """A fixture spec with an unknown generator or invalid parameters."""
