"""Kineme discovery from head-pose time series and trait prediction."""
from .action_units import AU_CODES, AU_NAMES, AUFrameTrack, AUSequence, DominantAUTransformer, dominant_au_sequence
from .codebook import (
    Codebook,
    CodebookConfig,
    KinemeEncoder,
    KinemeSequence,
    encode_segments,
    encode_series,
    kineme_trajectories,
    learn_kinemes,
)
from .factorization import FactorPair, MultiplicativeNMF, nmf_fit, nnls, nnls_project
from .mixture import GaussianMixture, GaussianMixtureEM, gmm_fit, gmm_posterior
from .pose import ChannelOffsets, HeadPoseSeries, SegmentMatrix, segment_series, stack_and_shift

__version__ = "0.1.0"

__all__ = [
    "AU_CODES", "AU_NAMES", "AUFrameTrack", "AUSequence", "DominantAUTransformer", "dominant_au_sequence",
    "Codebook", "CodebookConfig", "KinemeEncoder", "KinemeSequence", "encode_segments", "encode_series",
    "kineme_trajectories", "learn_kinemes",
    "FactorPair", "MultiplicativeNMF", "nmf_fit", "nnls", "nnls_project",
    "GaussianMixture", "GaussianMixtureEM", "gmm_fit", "gmm_posterior",
    "ChannelOffsets", "HeadPoseSeries", "SegmentMatrix", "segment_series", "stack_and_shift",
]
