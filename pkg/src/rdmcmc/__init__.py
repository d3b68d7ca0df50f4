"""Fixed-slope lossy compression by annealed Gibbs sampling over reconstructions."""

from .annealer import (AnnealerConfig, RunTrace, Schedule, SearchTooLarge, anneal,
                       default_T0, delta_bound, exhaustive_search, gibbs_conditional)
from .context import (CYCLIC, LINEAR, ContextDelta, ContextTable, CountMatrix, apply_flip,
                      build_counts, conditional_entropy, entropy_functional)
from .denoise import NoiseModel, bayes_fb, denoise, derandomize, difference_distortion, slope_search
from .energy import EnergySpec, delta_energy, distortion, energy, hamming
from .lossless import enumerative_length, lz78_decode, lz78_encode, lz78_length
from .sliding import SBCode, apply_sb, enumerate_sb_codes, label_sequence, sb_anneal, sb_flip_update
from .sources import SourceSpec, bsc, bsms, bernoulli, critical_distortion, generate, rd_bernoulli, slb_bsms

__version__ = "0.1.0"
