"""Training harness for simulator-generated intensity datasets."""

from .compare import compare_curves
from .data import (DatasetError, Manifest, area_downsample, item_groups,
                   load_arrays, read_cint, split_by_group, split_indices)
from .models import SmallCnn, build_model
from .train import AccuracyReport, TrainConfig, train_eval

__version__ = "0.1.0"
