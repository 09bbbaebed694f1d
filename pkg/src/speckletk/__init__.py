"""speckletk: tuneable dynamic-speckle activity maps, fusion, and simulation."""

__version__ = "0.1.0"

from .descriptors import (
    ActivityMap,
    Algorithm,
    DescriptorParams,
    avd_map,
    compute_descriptor,
    fujii_map,
    gd_map,
    generalized_sum,
    tau_map,
)
from .edges import EdgeParams, canny_edges, gaussian_blur
from .postprocess import (
    CompositeSpec,
    DisplayParams,
    FixedRange,
    MinMax,
    PseudocolorLut,
    apply_exponent,
    apply_pseudocolor,
    compose_rgb,
    normalize_map,
    psnr,
    quantize_u8,
)
from .simulate import (
    ActivityField,
    SimulationParams,
    generate_stack,
    glyph_field,
    separation_score,
)
from .stack_io import (
    FrameStack,
    SpkFrameReader,
    SpkFrameWriter,
    StackMetadata,
    downsample,
    import_frame_dir,
    read_stack,
    write_stack,
)

__all__ = [
    "__version__",
    "ActivityField",
    "ActivityMap",
    "Algorithm",
    "CompositeSpec",
    "DescriptorParams",
    "DisplayParams",
    "EdgeParams",
    "FixedRange",
    "FrameStack",
    "MinMax",
    "PseudocolorLut",
    "SimulationParams",
    "SpkFrameReader",
    "SpkFrameWriter",
    "StackMetadata",
    "apply_exponent",
    "apply_pseudocolor",
    "avd_map",
    "canny_edges",
    "compose_rgb",
    "compute_descriptor",
    "downsample",
    "fujii_map",
    "gaussian_blur",
    "gd_map",
    "generalized_sum",
    "generate_stack",
    "glyph_field",
    "import_frame_dir",
    "normalize_map",
    "psnr",
    "quantize_u8",
    "read_stack",
    "separation_score",
    "tau_map",
    "write_stack",
]
