"""Weighted-TV sparse-view CT: phantoms, projector, FBP, weights, solver, metrics."""

from ._svtv import (
    Projector,
    fbp,
    metrics,
    phantom,
    simulate,
    solve,
    weights,
)

__all__ = ["Projector", "fbp", "metrics", "phantom", "simulate", "solve", "weights"]
