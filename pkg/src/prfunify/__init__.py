"""Variable-PRF to uniform-grid azimuth resampling (POLYPHASE scheme)."""

from .errors import StarvedOutputsError, ValidationError
from .filters import (FirFilter, PolyphaseBank, design_combined, design_filter_bank,
                      design_prototype, frequency_response, polyphase_decompose, upsample_shaping)
from .grid import GridDesign, align_to_dense_grid, design_output_grid, map_position
from .resampler import (ResampleState, active_component, finalize, ingest_pulse, resample,
                        sparsity_check, target_output_range)

__version__ = "0.1.0"

__all__ = [
    "FirFilter", "PolyphaseBank", "GridDesign", "ResampleState",
    "StarvedOutputsError", "ValidationError",
    "design_prototype", "upsample_shaping", "design_combined", "polyphase_decompose",
    "frequency_response", "design_filter_bank",
    "design_output_grid", "map_position", "align_to_dense_grid",
    "active_component", "target_output_range", "ingest_pulse", "finalize",
    "sparsity_check", "resample",
]
