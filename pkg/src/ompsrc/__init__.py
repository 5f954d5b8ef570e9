"""Orthogonal Matching Pursuit, sparse representation-based classification
and a grid-voting image classifier built from them."""

from .errors import OmpSrcError
from .linalg import least_squares, normalize_l2, residual_norm
from .omp import (ExactSparsity, Noiseless, ResidualBound, SparseCode, l0_oracle,
                  mutual_coherence, omp_solve)
from .src import ClassMask, ClassResidualTable, build_class_masks, classify_patch
from .pipeline import (Dictionary, EvaluationReport, GridSpec, ImagePrediction,
                       build_dictionary, classify_image, downsample, evaluate,
                       partition_grid)
from .dictfile import load_dictionary, save_dictionary
from .dataset import (Sample, SampleMeta, SynthConfig, generate_synthetic,
                      parse_filename, split)

__version__ = "0.1.0"
