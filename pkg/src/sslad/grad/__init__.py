from .graph import Graph, GraphError, NonFiniteError, ShapeError
from .params import ParamSet, ParamSpec, philox_generator
from .losses import bce, bce_with_grad, mse, mse_with_grad
from .adam import AdamState, adam_step
from .checkpoint import CheckpointError, load_params, save_params

__all__ = [
    "AdamState",
    "CheckpointError",
    "Graph",
    "GraphError",
    "NonFiniteError",
    "ParamSet",
    "ParamSpec",
    "ShapeError",
    "adam_step",
    "bce",
    "bce_with_grad",
    "load_params",
    "mse",
    "mse_with_grad",
    "philox_generator",
    "save_params",
]
