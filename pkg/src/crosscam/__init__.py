"""Cross-camera person re-identification ranking with transition priors.

The package fuses appearance-embedding cosine similarity with a learned
camera-to-camera transition prior, evaluates the effect through Cumulative
Matching Characteristic curves, and ships a deterministic pedestrian
simulator for desk-scale experiments.
"""

__version__ = "0.1.0"

from .embeddings import Embedding, Observation, normalize_parts, sim_app
from .evaluation import CmcCurve, cmc, rank_k_table, separation
from .fusion import QueryGallerySplit, RankingResult, fused_sim, rank, rank_all, similarity_matrix
from .graph import CameraGraph, load_graph
from .simulator import SimConfig, SimWorld, simulate, split_identities
from .transition import TransitionModel, Trajectory, estimate, extract_trajectories

__all__ = [
    "CameraGraph",
    "CmcCurve",
    "Embedding",
    "Observation",
    "QueryGallerySplit",
    "RankingResult",
    "SimConfig",
    "SimWorld",
    "Trajectory",
    "TransitionModel",
    "cmc",
    "estimate",
    "extract_trajectories",
    "fused_sim",
    "load_graph",
    "normalize_parts",
    "rank",
    "rank_all",
    "rank_k_table",
    "separation",
    "sim_app",
    "similarity_matrix",
    "simulate",
    "split_identities",
    "__version__",
]
