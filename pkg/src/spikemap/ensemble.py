"""Random-network ensembles and (gamma, coupling) parameter sweeps.

Networks are drawn with i.i.d. Gaussian weights of variance C^2/N (the 1/N
scaling keeps the total input current's variance size-independent), zero
external drive by default.  Sweeping gamma and C maps out the transition
from global quiescence through a near-singular band to short stable cycles;
the per-cell log-distance surface is the plot-ready product.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import NetworkParams, ValidationError, compute_bounds
from .orbits import (
    classify_regime,
    dist_attractor_to_S,
    effective_lyapunov,
    omega_sample,
)

__all__ = [
    "EnsembleSpec",
    "SweepCell",
    "LyapCell",
    "sample_network",
    "sweep",
    "lyapunov_map",
]

LOG10_FLOOR = 1e-300  # keeps the geometric mean finite when an orbit sits exactly on the threshold


@dataclass(frozen=True)
class EnsembleSpec:
    """Distribution of one random network: size, coupling scale, and map parameters."""

    n: int
    c: float
    gamma: float
    theta: float = 1.0
    i_ext: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if not (self.c >= 0 and np.isfinite(self.c)):
            raise ValidationError(f"c must be >= 0, got {self.c}")


def sample_network(spec: EnsembleSpec, rng: np.random.Generator) -> NetworkParams:
    """Draw one network: weights i.i.d. N(0, c^2/n), diagonal included."""
    sigma = spec.c / math.sqrt(spec.n)
    w = rng.normal(0.0, sigma, size=(spec.n, spec.n)) if sigma > 0 else np.zeros((spec.n, spec.n))
    return NetworkParams(
        n=spec.n,
        gamma=spec.gamma,
        theta=spec.theta,
        weights=w,
        i_ext=np.full(spec.n, spec.i_ext, dtype=np.float64),
    )


@dataclass(frozen=True)
class SweepCell:
    """Aggregates of one (gamma, c) grid cell over its sampled networks."""

    gamma: float
    c: float
    samples: int
    avg_d_as: float
    log10_d_as: float
    death_fraction: float
    avg_period: float
    undetermined_fraction: float


@dataclass(frozen=True)
class LyapCell:
    gamma: float
    c: float
    samples: int
    mean_lyapunov: float


def _float_bits(x: float) -> int:
    return int(np.float64(x).view(np.uint64))


def _stream(seed: int, gamma: float, c: float, *indices: int) -> np.random.Generator:
    """Rng keyed by the cell's parameter values, so results are independent of grid order."""
    key = [int(seed), _float_bits(gamma), _float_bits(c), *[int(i) for i in indices]]
    return np.random.default_rng(np.random.SeedSequence(key))


def _run_sweep_network(args):
    (seed, gamma, c, net_idx, n, theta, i_ext, inits,
     max_transient, max_period, tol, polish_steps, epsilon_singular) = args
    spec = EnsembleSpec(n=n, c=c, gamma=gamma, theta=theta, i_ext=i_ext, seed=seed)
    net = sample_network(spec, _stream(seed, gamma, c, net_idx))
    sample = omega_sample(
        net,
        inits,
        _stream(seed, gamma, c, net_idx, 1),
        max_transient=max_transient,
        max_period=max_period,
        tol=tol,
        polish_steps=polish_steps,
    )
    regime = classify_regime(
        net, sample.orbits, sample.undetermined,
        epsilon_singular=epsilon_singular, horizon=sample.horizon,
    )
    d = dist_attractor_to_S(sample.orbits) if sample.orbits else None
    periods = [o.period for o in sample.orbits]
    return regime.kind, d, periods, sample.undetermined


def _grid(gammas, cs):
    gammas = [float(g) for g in gammas]
    cs = [float(c) for c in cs]
    if not gammas or not cs:
        raise ValidationError("gamma and c grids must be nonempty")
    return gammas, cs


def sweep(
    gammas,
    cs,
    n: int,
    networks_per_cell: int,
    inits_per_network: int,
    *,
    max_transient: int = 3_000,
    max_period: int = 1_000,
    tol: float = 1e-10,
    polish_steps: int = 20_000,
    theta: float = 1.0,
    i_ext: float = 0.0,
    epsilon_singular: float = 1e-6,
    seed: int = 0,
    threads: int = 1,
    progress=None,
) -> list[SweepCell]:
    """Sample networks over the (gamma, c) grid and aggregate per cell.

    Cells are independent: each network's random stream is derived from
    (seed, gamma, c, network index) by value, so permuting the grids or the
    schedule cannot change any cell.  Rows come back in grid order (gammas
    outer, cs inner); ``progress(done, total, cell)`` is called per cell.
    """
    gammas, cs = _grid(gammas, cs)
    tasks = []
    for g in gammas:
        for c in cs:
            for k in range(networks_per_cell):
                tasks.append((seed, g, c, k, n, theta, i_ext, inits_per_network,
                              max_transient, max_period, tol, polish_steps, epsilon_singular))
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None
    results = pool.map(_run_sweep_network, tasks, chunksize=1) if pool else map(_run_sweep_network, tasks)
    cells = []
    total = len(gammas) * len(cs)
    try:
        for g in gammas:
            for c in cs:
                kinds, dists, periods, undet = [], [], [], 0
                for _ in range(networks_per_cell):
                    kind, d, ps, u = next(results)
                    kinds.append(kind)
                    if d is not None:
                        dists.append(d)
                    periods.extend(ps)
                    undet += u
                death = sum(k == "NeuralDeath" for k in kinds) / networks_per_cell
                avg_d = float(np.mean(dists)) if dists else math.nan
                log_d = (
                    float(np.mean([math.log10(max(d, LOG10_FLOOR)) for d in dists]))
                    if dists else math.nan
                )
                avg_p = float(np.mean(periods)) if periods else math.nan
                undet_frac = undet / (networks_per_cell * inits_per_network)
                cells.append(SweepCell(
                    gamma=g, c=c, samples=networks_per_cell,
                    avg_d_as=avg_d, log10_d_as=log_d, death_fraction=death,
                    avg_period=avg_p, undetermined_fraction=undet_frac,
                ))
                if progress is not None:
                    progress(len(cells), total, cells[-1])
    finally:
        if pool is not None:
            pool.shutdown()
    return cells


def _run_lyap_network(args):
    (seed, gamma, c, net_idx, n, theta, i_ext, inits,
     ball_radius, num_directions, horizon, burn_in) = args
    spec = EnsembleSpec(n=n, c=c, gamma=gamma, theta=theta, i_ext=i_ext, seed=seed)
    net = sample_network(spec, _stream(seed, gamma, c, net_idx))
    rng = _stream(seed, gamma, c, net_idx, 2)
    v_min, v_max = compute_bounds(net)
    vals = []
    for _ in range(inits):
        v0 = rng.uniform(v_min, v_max, net.n)
        vals.append(effective_lyapunov(
            net, v0, ball_radius, num_directions, horizon, rng, burn_in=burn_in,
        ))
    return vals


def lyapunov_map(
    gammas,
    cs,
    n: int,
    networks_per_cell: int,
    inits_per_network: int,
    ball_radius: float,
    horizon: int,
    *,
    num_directions: int = 8,
    burn_in: int = 100,
    theta: float = 1.0,
    i_ext: float = 0.0,
    seed: int = 0,
    threads: int = 1,
) -> list[LyapCell]:
    """Mean finite-ball expansion rate per (gamma, c) cell."""
    gammas, cs = _grid(gammas, cs)
    tasks = []
    for g in gammas:
        for c in cs:
            for k in range(networks_per_cell):
                tasks.append((seed, g, c, k, n, theta, i_ext, inits_per_network,
                              ball_radius, num_directions, horizon, burn_in))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_lyap_network, tasks, chunksize=1))
    else:
        results = [_run_lyap_network(t) for t in tasks]
    cells = []
    it = iter(results)
    for g in gammas:
        for c in cs:
            vals = []
            for _ in range(networks_per_cell):
                vals.extend(next(it))
            cells.append(LyapCell(
                gamma=g, c=c, samples=networks_per_cell,
                mean_lyapunov=float(np.mean(vals)),
            ))
    return cells
