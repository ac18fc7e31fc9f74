"""Raster coding: firing patterns, trajectory reconstruction from rasters, and
the pattern-transition structure of the map.

A firing pattern is a length-N 0/1 vector; a raster is a time-indexed stack
of patterns (one line of a raster plot per step).  Because fired coordinates
are reset, the raster plus the initial state determines the whole trajectory,
and after a neuron's first spike its potential is a function of the raster
alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .model import (
    CapacityError,
    NetworkParams,
    Trajectory,
    ValidationError,
    compute_bounds,
)

__all__ = [
    "IllegalCodeError",
    "fire_set",
    "pattern_cardinality",
    "pattern_to_str",
    "str_to_pattern",
    "encode",
    "reconstruct",
    "reconstruct_trajectory",
    "reconstruct_periodic",
    "TransitionGraph",
    "build_transition_graph",
    "is_markov_natural",
    "check_legal",
]

EDGE_UNCONDITIONAL = "unconditional"
EDGE_CONDITIONAL = "conditional"
EDGE_ILLEGAL = "illegal"

GRAPH_CAP_DEFAULT = 16


class IllegalCodeError(ValueError):
    """A raster cycle is not realizable by any state of the network."""


def fire_set(eta) -> np.ndarray:
    """Indices of neurons firing in pattern eta."""
    return np.flatnonzero(np.asarray(eta))


def pattern_cardinality(eta) -> int:
    """Number of firing neurons in the pattern."""
    return int(np.count_nonzero(np.asarray(eta)))


def pattern_to_str(eta) -> str:
    """Bitstring with neuron index increasing left to right."""
    return "".join("1" if b else "0" for b in np.asarray(eta))


def str_to_pattern(s: str) -> np.ndarray:
    if not set(s) <= {"0", "1"}:
        raise ValidationError(f"pattern string must be 0/1 characters, got {s!r}")
    return np.array([1 if c == "1" else 0 for c in s], dtype=np.uint8)


def encode(traj, theta: Optional[float] = None) -> np.ndarray:
    """Raster of a trajectory: raster[t][i] = 1 iff state t has v_i >= theta.

    Accepts a Trajectory (theta taken from its network) or a (T, N) array of
    states together with an explicit theta.
    """
    if isinstance(traj, Trajectory):
        states, theta = traj.states, traj.net.theta
    else:
        states = np.asarray(traj, dtype=np.float64)
        if theta is None:
            raise ValidationError("encode of a raw state array requires theta")
    return (np.atleast_2d(states) >= theta).astype(np.uint8)


def _check_raster(raster, n: int) -> np.ndarray:
    r = np.atleast_2d(np.asarray(raster, dtype=np.uint8))
    if r.shape[1] != n:
        raise ValidationError(f"raster width {r.shape[1]} does not match N={n}")
    return r


def reconstruct_trajectory(net: NetworkParams, v0, raster) -> np.ndarray:
    """All states of the trajectory implied by v0 and its raster.

    Replays the affine recursion with the stored firing bits in place of
    threshold tests, so when the raster is the encoding of a simulated
    trajectory the result matches the simulation bit for bit; a neuron's
    initial condition drops out at its first recorded spike.
    """
    raster = _check_raster(raster, net.n)
    v = np.asarray(v0, dtype=np.float64)
    if v.shape != (net.n,):
        raise ValidationError(f"v0 must have shape ({net.n},), got {v.shape}")
    out = np.empty((raster.shape[0], net.n), dtype=np.float64)
    out[0] = v
    for t in range(1, raster.shape[0]):
        eta = raster[t - 1].astype(np.float64)
        v = net.gamma * v * (1.0 - eta) + net.weights @ eta + net.i_ext
        out[t] = v
    return out


def reconstruct(net: NetworkParams, v0, raster, t: int) -> np.ndarray:
    """State at time t from the initial state and the raster up to time t."""
    raster = _check_raster(raster, net.n)
    if not (0 <= t < raster.shape[0]):
        raise ValidationError(f"t={t} outside raster of length {raster.shape[0]}")
    return reconstruct_trajectory(net, v0, raster[: t + 1])[t]


def reconstruct_periodic(net: NetworkParams, cycle) -> np.ndarray:
    """States of the periodic orbit realizing a raster cycle, one per phase.

    The cycle is read as a bi-infinite periodic code.  For a neuron that
    fires within the cycle the state is the finite leak-weighted sum of
    currents since its last spike; for a neuron that never fires the
    periodic geometric tail is summed in closed form (division by
    1 - gamma^P).  Raises IllegalCodeError when no state realizes the code,
    i.e. when encoding the reconstructed states disagrees with the input.
    """
    cycle = _check_raster(cycle, net.n)
    p = cycle.shape[0]
    if p == 0:
        raise ValidationError("cycle must be nonempty")
    eta = cycle.astype(np.float64)
    currents = eta @ net.weights.T + net.i_ext  # currents[t] = current injected by pattern t
    fires_somewhere = cycle.any(axis=0)

    # Phase-0 state: closed-form geometric sum for never-firing coordinates;
    # fired coordinates get a placeholder the replay below washes out.
    v = np.zeros(net.n, dtype=np.float64)
    if not fires_somewhere.all():
        acc = np.zeros(net.n, dtype=np.float64)
        for k in range(p - 1, -1, -1):  # Horner, oldest current innermost
            acc = net.gamma * acc + currents[(-k - 1) % p]
        quiet = ~fires_somewhere
        v[quiet] = acc[quiet] / (1.0 - net.gamma ** p)

    # Two replay passes: after a firing coordinate's first spike the
    # placeholder start is irrelevant, so pass two is exact at every phase.
    states = np.empty((p, net.n), dtype=np.float64)
    for s in range(2 * p):
        e = eta[s % p]
        v = net.gamma * v * (1.0 - e) + net.weights @ e + net.i_ext
        if s >= p:
            states[(s + 1) % p] = v
    got = encode(states, net.theta)
    if not np.array_equal(got, cycle):
        raise IllegalCodeError(
            "raster cycle is not realizable: reconstructed states encode to a different cycle"
        )
    return states


@dataclass(frozen=True)
class TransitionGraph:
    """Feasibility structure of pattern-to-pattern transitions.

    Built once per network over all 2^N patterns.  Per source pattern the
    conditions factorize neuron by neuron: a fired neuron's next bit is
    forced by its (state-independent) incoming current, while a quiescent
    neuron may be forced or free depending on whether the current plus the
    leaked potential can straddle the threshold on [v_min, theta).  An edge
    is ``unconditional`` when every neuron's requirement holds for all
    admissible potentials, ``conditional`` when it holds only on a
    sub-interval, and ``illegal`` when some neuron's requirement is
    infeasible.
    """

    net: NetworkParams
    v_min: float
    src_bits: np.ndarray   # (2^N, N) uint8
    currents: np.ndarray   # (2^N, N) current injected by each source pattern
    forced_bit: np.ndarray  # (2^N, N) uint8, next bit of fired neurons
    fire_ok: np.ndarray    # (2^N, N) bool, quiescent neuron can reach theta
    stay_ok: np.ndarray    # (2^N, N) bool, quiescent neuron can stay below theta

    @property
    def n(self) -> int:
        return self.net.n

    @property
    def num_patterns(self) -> int:
        return self.src_bits.shape[0]

    def _index(self, eta) -> int:
        if isinstance(eta, (int, np.integer)):
            idx = int(eta)
            if not (0 <= idx < self.num_patterns):
                raise ValidationError(f"pattern index {idx} out of range")
            return idx
        if isinstance(eta, str):
            eta = str_to_pattern(eta)
        bits = np.asarray(eta).astype(np.uint8)
        if bits.shape != (self.n,):
            raise ValidationError(f"pattern must have length {self.n}")
        return int(np.dot(bits, 1 << np.arange(self.n)))

    def pattern(self, idx: int) -> np.ndarray:
        return self.src_bits[idx]

    def _free_mask(self, a: int) -> np.ndarray:
        quiescent = self.src_bits[a] == 0
        return quiescent & self.fire_ok[a] & self.stay_ok[a]

    def edge_kind(self, src, dst) -> str:
        a, b = self._index(src), self._index(dst)
        sa = self.src_bits[a]
        sb = self.src_bits[b]
        fired = sa == 1
        if not np.array_equal(sb[fired], self.forced_bit[a][fired]):
            return EDGE_ILLEGAL
        quiescent = ~fired
        want_fire = quiescent & (sb == 1)
        want_stay = quiescent & (sb == 0)
        if not self.fire_ok[a][want_fire].all() or not self.stay_ok[a][want_stay].all():
            return EDGE_ILLEGAL
        return EDGE_CONDITIONAL if self._free_mask(a).any() else EDGE_UNCONDITIONAL

    def conditional_intervals(self, src, dst) -> dict[int, tuple[float, float]]:
        """Per-neuron sub-intervals of [v_min, theta) that enable a conditional edge.

        Keys are the neurons whose outcome genuinely depends on the potential;
        intervals are half-open [lo, hi).
        """
        a, b = self._index(src), self._index(dst)
        if self.edge_kind(a, b) == EDGE_ILLEGAL:
            raise ValidationError("edge is illegal; no enabling interval exists")
        theta, gamma = self.net.theta, self.net.gamma
        out: dict[int, tuple[float, float]] = {}
        for i in np.flatnonzero(self._free_mask(a)):
            split = (theta - self.currents[a, i]) / gamma  # gamma > 0 whenever a neuron is free
            if self.src_bits[b, i] == 1:
                out[int(i)] = (max(self.v_min, split), theta)
            else:
                out[int(i)] = (self.v_min, min(split, theta))
        return out

    def successors(self, src) -> list[tuple[int, str]]:
        """Legal successor pattern indices of a source pattern, with edge kinds."""
        a = self._index(src)
        sa = self.src_bits[a]
        base = np.where(sa == 1, self.forced_bit[a], 0).astype(np.uint8)
        quiescent = sa == 0
        base[quiescent & self.fire_ok[a] & ~self.stay_ok[a]] = 1
        free = np.flatnonzero(self._free_mask(a))
        kind = EDGE_CONDITIONAL if free.size else EDGE_UNCONDITIONAL
        weights = 1 << np.arange(self.n)
        base_idx = int(np.dot(base, weights))
        out = []
        for combo in range(1 << free.size):
            idx = base_idx
            for k, i in enumerate(free):
                if combo >> k & 1:
                    idx += int(weights[i])
            out.append((idx, kind))
        return out

    def counts(self) -> dict[str, int]:
        """Edge counts by kind over all 2^N x 2^N pairs, computed without enumeration."""
        free_counts = [int(self._free_mask(a).sum()) for a in range(self.num_patterns)]
        conditional = sum(1 << c for c in free_counts if c > 0)
        unconditional = sum(1 for c in free_counts if c == 0)
        total = (1 << self.n) ** 2
        return {
            EDGE_UNCONDITIONAL: unconditional,
            EDGE_CONDITIONAL: conditional,
            EDGE_ILLEGAL: total - unconditional - conditional,
        }

    def iter_edges(self, include_illegal: bool = False) -> Iterator[tuple[int, int, str]]:
        for a in range(self.num_patterns):
            if include_illegal:
                for b in range(self.num_patterns):
                    yield a, b, self.edge_kind(a, b)
            else:
                for b, kind in self.successors(a):
                    yield a, b, kind

    @property
    def is_markov(self) -> bool:
        """True iff every domain maps into a single domain (no free neuron anywhere)."""
        quiescent = self.src_bits == 0
        return not (quiescent & self.fire_ok & self.stay_ok).any()


def build_transition_graph(net: NetworkParams, cap: int = GRAPH_CAP_DEFAULT) -> TransitionGraph:
    """Classify all pattern transitions of the network.

    Refuses networks with N above ``cap`` (the construction enumerates all
    2^N source patterns; per-neuron factorization keeps each one O(N)).
    """
    if net.n > cap:
        raise CapacityError(f"transition graph needs N <= {cap}, got N={net.n}")
    n = net.n
    num = 1 << n
    idx = np.arange(num, dtype=np.uint64)[:, None]
    src_bits = ((idx >> np.arange(n, dtype=np.uint64)[None, :]) & 1).astype(np.uint8)
    currents = src_bits.astype(np.float64) @ net.weights.T + net.i_ext
    theta, gamma = net.theta, net.gamma
    v_min = compute_bounds(net).v_min
    forced_bit = (currents >= theta).astype(np.uint8)
    if gamma > 0.0:
        fire_ok = gamma * theta + currents > theta
    else:
        fire_ok = currents >= theta
    stay_ok = gamma * v_min + currents < theta
    for arr in (src_bits, currents, forced_bit, fire_ok, stay_ok):
        arr.flags.writeable = False
    return TransitionGraph(
        net=net,
        v_min=v_min,
        src_bits=src_bits,
        currents=currents,
        forced_bit=forced_bit,
        fire_ok=fire_ok,
        stay_ok=stay_ok,
    )


def is_markov_natural(net: NetworkParams, cap: int = GRAPH_CAP_DEFAULT) -> bool:
    """Whether the next pattern is always determined by the current pattern alone."""
    return build_transition_graph(net, cap=cap).is_markov


def check_legal(raster, graph: TransitionGraph) -> bool:
    """True iff every consecutive pattern pair of the raster is a feasible transition."""
    r = _check_raster(raster, graph.n)
    return all(
        graph.edge_kind(r[t], r[t + 1]) != EDGE_ILLEGAL for t in range(r.shape[0] - 1)
    )
