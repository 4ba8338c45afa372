"""mihash: unsupervised binary hashing with an MI-driven shuffle step."""
from ._kernels import BACKEND
from .encoder import (HashModel, PackedCodes, forward, init_model, pack,
                      unpack)
from .errors import (ConfigError, FormatError, MihashError, ShapeError,
                     TrainingError)
from .mutual_info import MiReport, PairStats, estimate_stats, mi_gradient, mi_report
from .objectives import combined_loss, reg_loss, sim_loss
from .retrieval import HammingIndex, map_at_k, pr_curve, query_topk
from .tensor import SeededRng, matmul
from .training import TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConfigError", "FormatError", "HammingIndex", "HashModel",
    "MihashError", "MiReport", "PackedCodes", "PairStats", "SeededRng",
    "ShapeError", "TrainConfig", "TrainingError", "combined_loss",
    "estimate_stats", "forward", "init_model", "map_at_k", "matmul",
    "mi_gradient", "mi_report", "pack", "pr_curve", "query_topk", "reg_loss",
    "sim_loss", "train", "unpack", "__version__",
]
