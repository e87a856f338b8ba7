"""Adam optimizer with bias correction."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    lr: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def for_params(cls, params, lr=1e-4, betas=(0.5, 0.999), eps=1e-8):
        m = {n: np.zeros_like(params[n]) for n in params}
        v = {n: np.zeros_like(params[n]) for n in params}
        return cls(lr=lr, beta1=betas[0], beta2=betas[1], eps=eps, m=m, v=v)


def adam_step(params, grads, state):
    """One bias-corrected Adam update, in place on `params`.

    Only parameters present in `grads` are touched; their moments must
    exist in `state` with matching shapes. The step counter increments
    once per call.
    """
    state.t += 1
    c1 = 1.0 - state.beta1**state.t
    c2 = 1.0 - state.beta2**state.t
    for name, g in grads.items():
        p = params[name]
        if g.shape != p.shape:
            raise ValueError(f"grad shape mismatch for {name!r}: {g.shape} vs {p.shape}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= (state.lr / c1) * m / (np.sqrt(v / c2) + state.eps)
    return params
