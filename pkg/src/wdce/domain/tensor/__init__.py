"""Numeric core: tensors, reverse-mode gradients, seeded streams and gradient checks."""
from __future__ import annotations

from wdce.domain.tensor import dump, ops
from wdce.domain.tensor.engine import Graph, Node, Tensor, as_tensor, current_graph, no_grad
from wdce.domain.tensor.gradcheck import DEFAULT_STEP, grad_check
from wdce.domain.tensor.params import named_parameters, uniform_param, zeros_param
from wdce.domain.tensor.rng import Rng

__all__ = [
    "DEFAULT_STEP",
    "Graph",
    "Node",
    "Rng",
    "Tensor",
    "as_tensor",
    "current_graph",
    "dump",
    "grad_check",
    "named_parameters",
    "no_grad",
    "ops",
    "uniform_param",
    "zeros_param",
]
