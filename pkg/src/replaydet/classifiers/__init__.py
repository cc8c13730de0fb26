from .gmm import GmmPair, Mixture, gmm_score, train_gmm
from .mlp import Adam, MlpConfig, MlpModel, predict_mlp, train_mlp

__all__ = [
    "Adam",
    "MlpConfig",
    "MlpModel",
    "predict_mlp",
    "train_mlp",
    "Mixture",
    "GmmPair",
    "train_gmm",
    "gmm_score",
]
