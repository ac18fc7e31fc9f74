"""Asymptotics: periodic-orbit detection, distances to the firing threshold,
regime classification, and the finite-ball expansion-rate estimator.

The map contracts inside each constant-pattern domain, so generic long-run
behaviour is a finite set of stable periodic orbits.  The quantity that
organizes everything here is the gap between an orbit (or trajectory) and
the singularity set {some v_i = theta}: orbits with a large gap are robust,
orbits with a tiny gap make the dynamics look chaotic at any perturbation
scale above the gap.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .model import (
    NetworkParams,
    Trajectory,
    ValidationError,
    compute_bounds,
    max_dist,
    step,
)
from .coding import encode

__all__ = [
    "OrbitReport",
    "Undetermined",
    "find_periodic_orbit",
    "OmegaSample",
    "omega_sample",
    "dist_traj_to_S",
    "dist_attractor_to_S",
    "stable_manifold_radius",
    "markov_horizon",
    "period_bound",
    "period_bound_log2",
    "RegimeLabel",
    "classify_regime",
    "effective_lyapunov",
]

DEFAULT_MAX_TRANSIENT = 100_000
DEFAULT_MAX_PERIOD = 10_000
DEFAULT_TOL = 1e-10
DEFAULT_POLISH_STEPS = 20_000


@dataclass(frozen=True)
class OrbitReport:
    """A detected cycle.

    ``states`` holds one state per phase; applying the map to states[k]
    reproduces states[(k+1) % period] within the detection tolerance, and
    ``cycle_raster`` is their encoding.  ``min_threshold_gap`` is the
    smallest |v_i - theta| over the orbit, this orbit's contribution to the
    attractor-to-singularity distance.  ``transient`` is the first time the
    source trajectory came within tolerance of the cycle.
    """

    transient: int
    period: int
    states: np.ndarray       # (period, N)
    cycle_raster: np.ndarray  # (period, N) uint8
    min_threshold_gap: float


@dataclass(frozen=True)
class Undetermined:
    """No recurrence was found within the detection horizon.

    This is the reported face of ghost-like behaviour: a finite observation
    window cannot certify that a slowly creeping potential never fires.
    """

    horizon: int


def _pattern_key(v: np.ndarray, theta: float) -> bytes:
    return (v >= theta).tobytes()


def _brent_scan(net, v, budget, max_period, tol):
    """Brent cycle search with tolerance: O(1) state comparisons per step.

    Returns (lam, hare_state, steps_used); lam is None when no within-tol
    recurrence with period <= max_period shows up inside the budget.
    """
    theta = net.theta
    anchor = v
    anchor_key = _pattern_key(anchor, theta)
    power = 1
    lam = 1
    hare = step(net, v)
    used = 1
    while used <= budget:
        if (
            lam <= max_period
            and _pattern_key(hare, theta) == anchor_key
            and max_dist(hare, anchor) <= tol
        ):
            return lam, hare, used
        if lam == power:
            anchor = hare
            anchor_key = _pattern_key(anchor, theta)
            power *= 2
            lam = 0
        hare = step(net, hare)
        used += 1
        lam += 1
    return None, hare, used


def _divisors(p: int):
    for d in range(1, p + 1):
        if p % d == 0:
            yield d


def _polish(net, x0, period, tol, budget):
    """Verify and sharpen a candidate cycle.

    Iterates in chunks of one period; the firing pattern must keep repeating
    the first chunk's pattern sequence, otherwise the candidate was a
    pseudo-orbit and we reject (returning the advanced state so the caller
    can resume scanning).  Acceptance is by bit-identical chunk recurrence,
    or by within-tol closure once the budget runs out; division by the
    pattern check keeps tol-acceptance honest.  On success the minimal
    period is extracted by divisor reduction.
    """
    theta = net.theta
    budget = max(budget, 2 * period)
    chunk = np.empty((period + 1, net.n), dtype=np.float64)
    cyc_keys = None
    x = np.array(x0, dtype=np.float64)
    steps = 0
    exact = False
    while True:
        chunk[0] = x
        keys = [_pattern_key(x, theta)]
        ok = True
        for k in range(1, period + 1):
            x = step(net, x)
            steps += 1
            chunk[k] = x
            key = _pattern_key(x, theta)
            if cyc_keys is None:
                keys.append(key)
            elif key != cyc_keys[k % period]:
                ok = False
                break
        if not ok:
            return None, x
        if cyc_keys is None:
            if keys[period] != keys[0]:
                return None, x
            cyc_keys = keys[:period]
        if np.array_equal(chunk[period], chunk[0]):
            exact = True
            break
        if steps >= budget:
            if max_dist(chunk[period], chunk[0]) <= tol:
                break
            return None, x
    states = chunk[:period].copy()
    minimal = period
    for d in _divisors(period):
        if d == period:
            break
        shifted = np.roll(states, -d, axis=0)
        if (exact and np.array_equal(shifted, states)) or (
            not exact and float(np.max(np.abs(shifted - states))) <= tol
        ):
            minimal = d
            break
    states = states[:minimal]
    return (states, minimal), x


def _locate_entry(net, v0, states, tol, cap):
    """First time the trajectory of v0 comes within tol of the cycle, plus the phase hit."""
    theta = net.theta
    by_pattern: dict[bytes, list[int]] = {}
    for k in range(states.shape[0]):
        by_pattern.setdefault(_pattern_key(states[k], theta), []).append(k)
    v = np.array(v0, dtype=np.float64)
    for t in range(cap + 1):
        for k in by_pattern.get(_pattern_key(v, theta), ()):
            if max_dist(v, states[k]) <= tol:
                return t, k
        v = step(net, v)
    return cap, 0


def find_periodic_orbit(
    net: NetworkParams,
    v0,
    max_transient: int = DEFAULT_MAX_TRANSIENT,
    max_period: int = DEFAULT_MAX_PERIOD,
    tol: float = DEFAULT_TOL,
    polish_steps: int = DEFAULT_POLISH_STEPS,
) -> Union[OrbitReport, Undetermined]:
    """Detect the cycle a trajectory settles on, or report Undetermined.

    Burns max_transient steps, then scans up to 2*max_period further steps
    for a within-tol recurrence with matching firing pattern (Brent's
    method).  A candidate period is verified by re-simulation: its pattern
    sequence must keep repeating and the cycle must close, after which the
    states are polished to the exact floating-point cycle when one exists.
    The report is re-based at the first time the trajectory from v0 enters
    the detected cycle.

    Never raises on failure: no recurrence inside the horizon yields
    ``Undetermined(max_transient + 2*max_period)``.
    """
    if max_transient < 0 or max_period < 1:
        raise ValidationError("horizons must satisfy max_transient >= 0, max_period >= 1")
    if tol < 0:
        raise ValidationError(f"tol must be >= 0, got {tol}")
    v0 = np.asarray(v0, dtype=np.float64)
    if v0.shape != (net.n,):
        raise ValidationError(f"v0 must have shape ({net.n},), got {v0.shape}")
    horizon = max_transient + 2 * max_period
    v = v0
    for _ in range(max_transient):
        v = step(net, v)
    budget = 2 * max_period
    for _ in range(8):  # pseudo-orbit rejections restart the scan downstream
        if budget <= 0:
            break
        lam, v, used = _brent_scan(net, v, budget, max_period, tol)
        budget -= used
        if lam is None:
            break
        polished, v = _polish(net, v, lam, tol, polish_steps)
        if polished is None:
            continue
        states, period = polished
        transient, phase = _locate_entry(net, v0, states, tol, cap=horizon)
        states = np.roll(states, -phase, axis=0)
        states.flags.writeable = False
        raster = encode(states, net.theta)
        raster.flags.writeable = False
        gap = float(np.min(np.abs(states - net.theta)))
        return OrbitReport(
            transient=transient,
            period=period,
            states=states,
            cycle_raster=raster,
            min_threshold_gap=gap,
        )
    return Undetermined(horizon)


@dataclass(frozen=True)
class OmegaSample:
    """Distinct orbits found from random initial states (an inner estimate of the limit set)."""

    orbits: list
    undetermined: int
    horizon: int


def _same_orbit(a: OrbitReport, b: OrbitReport, tol: float) -> bool:
    if a.period != b.period:
        return False
    p = a.period
    for r in range(p):
        if np.array_equal(np.roll(b.cycle_raster, -r, axis=0), a.cycle_raster):
            if float(np.max(np.abs(np.roll(b.states, -r, axis=0) - a.states))) <= tol:
                return True
    return False


def _detect_from(args):
    net, v0, max_transient, max_period, tol, polish_steps = args
    return find_periodic_orbit(
        net, v0, max_transient=max_transient, max_period=max_period,
        tol=tol, polish_steps=polish_steps,
    )


def omega_sample(
    net: NetworkParams,
    num_inits: int,
    rng: np.random.Generator,
    max_transient: int = DEFAULT_MAX_TRANSIENT,
    max_period: int = DEFAULT_MAX_PERIOD,
    tol: float = DEFAULT_TOL,
    polish_steps: int = DEFAULT_POLISH_STEPS,
    threads: int = 1,
) -> OmegaSample:
    """Run orbit detection from random states in the invariant box and deduplicate.

    Orbits are identified up to cyclic rotation of their raster first (the
    raster is exact) and then by state proximity within tol.  Undetermined
    runs are counted, never raised.
    """
    if num_inits < 1:
        raise ValidationError(f"num_inits must be >= 1, got {num_inits}")
    v_min, v_max = compute_bounds(net)
    v0s = rng.uniform(v_min, v_max, size=(num_inits, net.n))
    tasks = [(net, v0s[k], max_transient, max_period, tol, polish_steps) for k in range(num_inits)]
    if threads > 1 and num_inits > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_detect_from, tasks))
    else:
        results = [_detect_from(t) for t in tasks]
    orbits: list[OrbitReport] = []
    undetermined = 0
    horizon = max_transient + 2 * max_period
    for res in results:
        if isinstance(res, Undetermined):
            undetermined += 1
            continue
        if not any(_same_orbit(prev, res, tol) for prev in orbits):
            orbits.append(res)
    return OmegaSample(orbits=orbits, undetermined=undetermined, horizon=horizon)


def dist_traj_to_S(traj: Trajectory) -> float:
    """Smallest |v_i(t) - theta| over the observed horizon.

    An upper estimate of the trajectory's true distance to the singularity
    set; reaching the threshold exactly gives 0.
    """
    if len(traj) == 0:
        raise ValidationError("trajectory must be nonempty")
    return float(np.min(np.abs(traj.states - traj.net.theta)))


def dist_attractor_to_S(orbits: list) -> float:
    """Smallest threshold gap over a set of detected orbits (exact per orbit)."""
    if not orbits:
        raise ValidationError("no orbits: cannot estimate the attractor distance")
    return min(o.min_threshold_gap for o in orbits)


def stable_manifold_radius(traj: Trajectory) -> float:
    """Certified perturbation radius over the observed horizon.

    Any perturbation of the initial state strictly smaller than this value
    (max metric) yields the identical raster over the horizon and decays
    geometrically toward the unperturbed trajectory.
    """
    return dist_traj_to_S(traj)


def markov_horizon(epsilon: float, domain_diameter: float, gamma: float) -> int:
    """Steps needed to contract a domain of the given diameter below epsilon.

    floor((log eps - log diam) / log gamma).  Special cases: epsilon >=
    diameter needs 0 steps; gamma = 0 collapses in a single step.
    """
    if not (epsilon > 0 and np.isfinite(epsilon)):
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    if not (domain_diameter > 0 and np.isfinite(domain_diameter)):
        raise ValidationError(f"domain_diameter must be positive, got {domain_diameter}")
    if not (0.0 <= gamma < 1.0):
        raise ValidationError(f"gamma must lie in [0, 1), got {gamma}")
    if epsilon >= domain_diameter:
        return 0
    if gamma == 0.0:
        return 1
    return int(math.floor((math.log(epsilon) - math.log(domain_diameter)) / math.log(gamma)))


def period_bound_log2(n: int, d_as: float, gamma: float) -> float:
    """log2 of the cycle-count/period bound: n * log(d_as) / log(gamma)."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if not (0.0 < gamma < 1.0):
        raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
    if not (d_as > 0 and np.isfinite(d_as)):
        raise ValidationError(f"d_as must be positive, got {d_as}")
    if d_as >= 1.0:
        warnings.warn("period bound is vacuous for attractor distances >= 1", stacklevel=2)
        return 0.0
    return n * math.log(d_as) / math.log(gamma)


def period_bound(n: int, d_as: float, gamma: float) -> float:
    """Upper bound on the number of distinguishable orbit segments, 2**log2-bound.

    Grows exponentially in n and in log(d_as); may overflow to inf, use
    :func:`period_bound_log2` for the log-scale value.
    """
    l2 = period_bound_log2(n, d_as, gamma)
    try:
        return 2.0 ** l2
    except OverflowError:
        return math.inf


_REGIME_KINDS = ("NeuralDeath", "FullActivity", "StablePeriodic", "NearSingular", "Undetermined")


@dataclass(frozen=True)
class RegimeLabel:
    """Tagged long-run regime; NearSingular carries the measured gap, Undetermined the horizon."""

    kind: str
    value: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _REGIME_KINDS:
            raise ValidationError(f"unknown regime kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == "NearSingular":
            return f"NearSingular({self.value!r})"
        if self.kind == "Undetermined":
            return f"Undetermined({int(self.value)})"
        return self.kind

    @staticmethod
    def parse(s: str) -> "RegimeLabel":
        if "(" in s:
            kind, _, rest = s.partition("(")
            return RegimeLabel(kind, float(rest.rstrip(")")))
        return RegimeLabel(s)


def _is_quiescent_fixed_point(o: OrbitReport) -> bool:
    return o.period == 1 and not o.cycle_raster.any()


def _is_full_activity_fixed_point(o: OrbitReport) -> bool:
    return o.period == 1 and o.cycle_raster.all()


def classify_regime(
    net: NetworkParams,
    orbits: list,
    undetermined_count: int,
    epsilon_singular: float = 1e-6,
    horizon: int = 0,
) -> RegimeLabel:
    """Label the sampled long-run behaviour of a network.

    Any undetermined run makes the whole sample Undetermined.  Otherwise a
    lone quiescent (resp. all-firing) fixed point is NeuralDeath (resp.
    FullActivity); remaining cases are NearSingular when the measured
    attractor gap falls below epsilon_singular, else StablePeriodic.
    """
    if undetermined_count > 0:
        return RegimeLabel("Undetermined", float(horizon))
    if not orbits:
        raise RuntimeError("no orbits and no undetermined runs: empty sample")
    if len(orbits) == 1 and _is_quiescent_fixed_point(orbits[0]):
        return RegimeLabel("NeuralDeath")
    if len(orbits) == 1 and _is_full_activity_fixed_point(orbits[0]):
        return RegimeLabel("FullActivity")
    d = dist_attractor_to_S(orbits)
    if d < epsilon_singular:
        return RegimeLabel("NearSingular", d)
    return RegimeLabel("StablePeriodic")


def _cube_directions(rng: np.random.Generator, k: int, n: int) -> np.ndarray:
    u = rng.uniform(-1.0, 1.0, size=(k, n))
    scale = np.max(np.abs(u), axis=1, keepdims=True)
    scale[scale == 0.0] = 1.0
    return u / scale


def effective_lyapunov(
    net: NetworkParams,
    v0,
    ball_radius: float,
    num_directions: int,
    horizon: int,
    rng: np.random.Generator,
    burn_in: int = 0,
) -> float:
    """Finite-ball expansion rate around the trajectory of v0.

    Keeps ``num_directions`` companions at max-metric distance
    ``ball_radius`` from the mother trajectory; each step all points are
    advanced, the per-step log of (max separation / radius) is recorded, and
    every companion is rescaled back to the radius along its displacement.
    The average over the horizon is the effective exponent at this
    perturbation scale: log(gamma) or below while the ball stays clear of
    the threshold, positive once the radius exceeds the attractor gap.

    Steps on which all companions collapse exactly onto the mother (every
    direction fired) contribute no sample and the companions are re-seeded;
    if every step collapses the result is -inf.
    """
    if not (ball_radius > 0 and np.isfinite(ball_radius)):
        raise ValidationError(f"ball_radius must be positive, got {ball_radius}")
    if num_directions < 1 or horizon < 1:
        raise ValidationError("num_directions and horizon must be >= 1")
    mother = np.asarray(v0, dtype=np.float64)
    for _ in range(burn_in):
        mother = step(net, mother)
    comps = mother + ball_radius * _cube_directions(rng, num_directions, net.n)
    total = 0.0
    samples = 0
    for _ in range(horizon):
        mother = step(net, mother)
        for k in range(num_directions):
            comps[k] = step(net, comps[k])
        seps = np.max(np.abs(comps - mother), axis=1)
        m = float(seps.max())
        if m == 0.0:
            comps = mother + ball_radius * _cube_directions(rng, num_directions, net.n)
            continue
        total += math.log(m / ball_radius)
        samples += 1
        dead = seps == 0.0
        if dead.any():
            comps[dead] = mother + ball_radius * _cube_directions(rng, int(dead.sum()), net.n)
        live = ~dead
        comps[live] = mother + (comps[live] - mother) * (ball_radius / seps[live, None])
    if samples == 0:
        return -math.inf
    return total / samples
