"""Camouflage effectiveness evaluation and composite pattern synthesis.

Color similarity uses Bhattacharyya scoring of quantized HSV histograms;
texture similarity uses gray-level co-occurrence features; pattern design
combines multi-environment dominant colors with donor patch geometry from
k-means segmentation.
"""

__version__ = "0.1.0"

from .color_hist import (
    ColorHistogram,
    QuantizationScheme,
    SimilarityScore,
    bhattacharyya,
    build_histogram,
    dump_histogram,
    histogram_from_json,
    histogram_to_json,
    load_histogram,
    merge_histograms,
    quantize,
    quantize_image,
)
from .errors import (
    BadSpec,
    BadWeights,
    BinMismatch,
    CamoEvalError,
    DegenerateImage,
    EmptyHistogram,
    EmptyImage,
    EmptyPalette,
    MalformedImage,
    NoPatches,
    PaletteTooLarge,
    TooFewPixels,
    UnsupportedFormat,
)
from .fixtures import ENVIRONMENT_FIXTURES, FixtureSpec, STANDARD_FIXTURES, generate_fixture, standard_fixture
from .image_io import (
    HsvPixel,
    RasterImage,
    decode_image,
    encode_png,
    image_to_hsv,
    load_image,
    rgb_to_hsv,
    rgb_to_hsv_unit,
    save_png,
)
from .segment import (
    EdgeMask,
    KmeansConfig,
    Patch,
    SegmentationMap,
    extract_edges,
    extract_patches,
    kmeans_segment,
)
from .synth import (
    CamoPattern,
    DesignEvaluation,
    Palette,
    PaletteEntry,
    dominant_palette,
    evaluate_design,
    render_pattern,
)
from .texture import (
    Glcm,
    GlcmConfig,
    TextureComparison,
    TextureFeatures,
    TextureVector,
    compute_glcm,
    glcm_features,
    texture_compare,
    texture_vector,
    to_gray,
)
