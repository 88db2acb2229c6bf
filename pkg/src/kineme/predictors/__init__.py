"""Sequence models for trait prediction."""
from .hmm import DiscreteHMM, HMMClassifier, hmm_classify, hmm_fit, hmm_loglik
from .lstm import LSTMClassifier, LSTMRegressor, SeqNet, seqnet_forward, seqnet_train

__all__ = [
    "DiscreteHMM", "HMMClassifier", "hmm_classify", "hmm_fit", "hmm_loglik",
    "LSTMClassifier", "LSTMRegressor", "SeqNet", "seqnet_forward", "seqnet_train",
]
