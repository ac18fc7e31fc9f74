"""Core model: the threshold map, phase-space bounds, and trajectory simulation.

The network state is a vector of membrane potentials v.  Each step, every
neuron at or above the firing threshold emits a spike and is reset; every
sub-threshold neuron leaks by a factor gamma.  All neurons then receive the
synaptic current injected by the spikes of the *previous* state plus a
constant external drive, synchronously:

    v_i' = gamma * v_i * (1 - z_i) + sum_j W_ij * z_j + i_ext_i,
    z_j  = 1 if v_j >= theta else 0.

The map is affine on each of the 2^N domains on which the firing pattern z
is constant, contracting with factor gamma in quiescent directions and
collapsing fired directions to a point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

__all__ = [
    "CapacityError",
    "ValidationError",
    "NetworkParams",
    "Bounds",
    "Trajectory",
    "compute_bounds",
    "spiking_state",
    "synaptic_current",
    "step",
    "step_noisy",
    "simulate",
    "firing_times",
    "max_dist",
]


class ValidationError(ValueError):
    """Input failed structural validation (shape, range, or file content)."""


class CapacityError(RuntimeError):
    """Request exceeds a hard size limit (e.g. the graph enumeration cap)."""


def _as_vector(x, n: int, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (n,):
        raise ValidationError(f"{name} must have shape ({n},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} must be finite")
    return v


@dataclass(frozen=True)
class NetworkParams:
    """Fixed parameters of an N-neuron network.

    ``weights[i, j]`` is the synaptic weight from neuron j onto neuron i, so
    row i collects the inputs of neuron i.  ``gamma`` in [0, 1) is the
    per-step leak factor of sub-threshold potentials, ``theta`` > 0 the
    firing threshold, and ``i_ext`` a constant external drive per neuron.

    Instances are immutable (arrays are marked read-only) and safe to share
    across threads.
    """

    n: int
    gamma: float
    theta: float
    weights: np.ndarray
    i_ext: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        gamma = float(self.gamma)
        theta = float(self.theta)
        if not (0.0 <= gamma < 1.0):
            raise ValidationError(f"gamma must lie in [0, 1), got {gamma}")
        if not (np.isfinite(theta) and theta > 0.0):
            raise ValidationError(f"theta must be finite and > 0, got {theta}")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (n, n):
            raise ValidationError(f"weights must have shape ({n}, {n}), got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite")
        ie = _as_vector(self.i_ext, n, "i_ext")
        w = np.ascontiguousarray(w)
        w.flags.writeable = False
        ie.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "i_ext", ie)


class Bounds(NamedTuple):
    v_min: float
    v_max: float


def compute_bounds(net: NetworkParams) -> Bounds:
    """Invariant phase-space box [v_min, v_max]^N : one step maps it into itself.

    v_min floors the most inhibited neuron's geometric accumulation, v_max
    caps the most excited one; empty weight sums contribute 0, and the box
    always contains the reset value 0.
    """
    w = net.weights
    neg = np.where(w < 0.0, w, 0.0).sum(axis=1)
    pos = np.where(w > 0.0, w, 0.0).sum(axis=1)
    scale = 1.0 / (1.0 - net.gamma)
    v_min = min(0.0, scale * float(np.min(neg + net.i_ext)))
    v_max = max(0.0, scale * float(np.max(pos + net.i_ext)))
    return Bounds(v_min, v_max)


def spiking_state(v: float, theta: float) -> int:
    """1 iff v >= theta.  The comparison is exactly >=, with no tolerance."""
    return 1 if v >= theta else 0


def synaptic_current(net: NetworkParams, eta) -> np.ndarray:
    """Current injected into each neuron by the firing pattern eta (0/1 vector)."""
    e = np.asarray(eta, dtype=np.float64)
    if e.shape != (net.n,):
        raise ValidationError(f"pattern must have shape ({net.n},), got {e.shape}")
    return net.weights @ e


def step(net: NetworkParams, v) -> np.ndarray:
    """One synchronous update.  All firing states are read from the input state."""
    v = np.asarray(v, dtype=np.float64)
    z = (v >= net.theta).astype(np.float64)
    return net.gamma * v * (1.0 - z) + net.weights @ z + net.i_ext


def step_noisy(net: NetworkParams, v, sigma_b: float, rng: Optional[np.random.Generator]) -> np.ndarray:
    """One update plus i.i.d. Gaussian noise of standard deviation sigma_b per neuron.

    sigma_b = 0 is bit-identical to :func:`step`.
    """
    if not (np.isfinite(sigma_b) and sigma_b >= 0.0):
        raise ValidationError(f"sigma_b must be finite and >= 0, got {sigma_b}")
    if sigma_b == 0.0:
        return step(net, v)
    if rng is None:
        raise ValidationError("sigma_b > 0 requires a seeded rng")
    return step(net, v) + rng.normal(0.0, sigma_b, net.n)


@dataclass(frozen=True)
class Trajectory:
    """A simulated orbit: states[t] is the state at time t, raster[t] its firing pattern."""

    net: NetworkParams
    states: np.ndarray  # (T+1, N) float64
    raster: np.ndarray  # (T+1, N) uint8

    def __len__(self) -> int:
        return self.states.shape[0]


def simulate(
    net: NetworkParams,
    v0,
    t_max: int,
    sigma_b: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> Trajectory:
    """Iterate the map t_max times from v0, recording states and the raster.

    With sigma_b > 0 a Gaussian perturbation is added at every step (an rng
    is then required); runs are reproducible given the rng seed.
    """
    if t_max < 0:
        raise ValidationError(f"t_max must be >= 0, got {t_max}")
    if sigma_b > 0.0 and rng is None:
        raise ValidationError("sigma_b > 0 requires a seeded rng")
    v = _as_vector(v0, net.n, "v0")
    states = np.empty((t_max + 1, net.n), dtype=np.float64)
    states[0] = v
    for t in range(1, t_max + 1):
        v = step_noisy(net, v, sigma_b, rng) if sigma_b > 0.0 else step(net, v)
        states[t] = v
    raster = (states >= net.theta).astype(np.uint8)
    states.flags.writeable = False
    raster.flags.writeable = False
    return Trajectory(net=net, states=states, raster=raster)


def firing_times(raster: np.ndarray, i: int) -> np.ndarray:
    """Times t with raster[t][i] = 1, ascending; empty if neuron i never fires."""
    raster = np.asarray(raster)
    n = raster.shape[1]
    if not (0 <= i < n):
        raise IndexError(f"neuron index {i} out of range for N={n}")
    return np.flatnonzero(raster[:, i])


def max_dist(a, b) -> float:
    """Distance in the max metric, the natural metric for this product-structured map."""
    return float(np.max(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))))
