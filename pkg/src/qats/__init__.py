"""Sublinear HMM decoding by quick adaptive ternary segmentation."""
from .model import (GaussianEmission, HmmModel, ModelError, benchmark_model, build_model,
                    expected_segments, load_model, save_model, uniform_transition)
from .scores import CumScores, ScoredStates, ScoreError, build_cum_scores
from .search import (LocalMax1D, LocalMax2D, SearchParams, optimistic_search, osh2, osh3,
                     sosh3)
from .simulate import SimConfig, SimOutput, gaussian_log_densities, simulate_hmm
from .ternary import (DecodeResult, InfeasibleError, Segmentation, build_path, merge_runs,
                      qats_decode, segments_of)
from .viterbi import LogDensityMatrix, brute_force_map, complete_log_lik, viterbi_decode

__version__ = "0.1.0"
