"""Partially coherent wave-optics simulation engine.

Synthesizes partially coherent illumination with dynamic Gaussian-
correlated phase screens, propagates fields through object / diffuser /
pinhole scenes with the band-limited angular spectrum method, measures
fringe visibility, two-dimensional image entropy and speckle statistics,
and emits labeled intensity datasets for a separate training harness.
"""

from .errors import (CohsimError, ConfigurationError, ContractError, DataError,
                     NumericalAbortError)
from .field import (ComplexField, GridSpec, IntensityImage, default_grid,
                    dump_field, load_field, new_plane_wave, to_intensity, total_power)
from .propagation import PropagationPlan, make_plan, propagate, propagate_round_trip
from .coherence import (EnsembleSpec, PhaseScreenSpec, apply_screen,
                        coherent_limit_intensity, ensemble_intensity, mix_seed,
                        sample_phase_screen)
from .scene import (Detector, DiffuserSpec, DiffuserStage, FreeSpace, ObjectStage,
                    PinholeMaskSpec, PinholeStage, SceneConfig, SlmObject,
                    apply_diffuser, apply_pinholes, apply_slm, run_scene)
from .datasets import (DatasetManifest, IdxDataset, load_idx, parse_idx,
                       read_cint, select_objects, write_cint, write_idx,
                       write_intensity_record)
from .metrology import (EntropyReport, FringeWindow, SpeckleReport, VisibilityReport,
                        Window, entropy_2d, fringe_visibility, mean_entropy,
                        quantize_to_u8, speckle_stats)

__version__ = "0.1.0"
