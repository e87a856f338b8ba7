"""Scalar losses and their gradients with respect to the prediction."""

import numpy as np

BCE_EPS = 1e-7


def mse(pred, target):
    """Mean squared error over every element."""
    if pred.shape != target.shape:
        raise ValueError(f"mse shape mismatch: {pred.shape} vs {target.shape}")
    d = pred - target
    return float(np.mean(d * d))


def mse_with_grad(pred, target):
    if pred.shape != target.shape:
        raise ValueError(f"mse shape mismatch: {pred.shape} vs {target.shape}")
    d = pred - target
    return float(np.mean(d * d)), (2.0 / d.size) * d


def bce(p, target):
    """Binary cross-entropy of probabilities `p` against a scalar 0/1 target.

    `p` is clamped to [BCE_EPS, 1 - BCE_EPS] before the log, so exact 0/1
    activations cannot produce infinities.
    """
    if target not in (0, 1):
        raise ValueError("bce target must be 0 or 1")
    pc = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    if target == 1:
        return float(-np.mean(np.log(pc)))
    return float(-np.mean(np.log1p(-pc)))


def bce_with_grad(p, target):
    """Returns (loss, d loss / d p); the gradient is zero where p was clamped."""
    if target not in (0, 1):
        raise ValueError("bce target must be 0 or 1")
    pc = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    inside = (p > BCE_EPS) & (p < 1.0 - BCE_EPS)
    if target == 1:
        loss = float(-np.mean(np.log(pc)))
        grad = np.where(inside, -1.0 / (p.size * pc), 0.0).astype(p.dtype)
    else:
        loss = float(-np.mean(np.log1p(-pc)))
        grad = np.where(inside, 1.0 / (p.size * (1.0 - pc)), 0.0).astype(p.dtype)
    return loss, grad
