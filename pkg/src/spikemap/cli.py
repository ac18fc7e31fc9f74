"""Command-line entry points: simulate, graph, orbit, sweep, lyap.

Exit codes: 0 on success, 2 for input/validation/IO errors, 3 when a request
exceeds a capability limit.  All randomized commands are bit-reproducible
under ``--seed``; every output file embeds its effective configuration.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .model import (
    CapacityError,
    NetworkParams,
    ValidationError,
    compute_bounds,
    simulate,
)
from .coding import build_transition_graph
from .orbits import (
    classify_regime,
    dist_attractor_to_S,
    effective_lyapunov,
    omega_sample,
)
from .ensemble import lyapunov_map, sweep
from . import fileio


def _parse_grid(spec: str) -> list[float]:
    """Either comma-separated values or lo:hi:count for a uniform grid."""
    try:
        if ":" in spec:
            lo, hi, count = spec.split(":")
            values = np.linspace(float(lo), float(hi), int(count))
            if values.size == 0:
                raise ValueError("empty grid")
            return [float(v) for v in values]
        return [float(v) for v in spec.split(",") if v != ""]
    except ValueError as e:
        raise ValidationError(f"bad grid spec {spec!r}: {e}") from e


def _parse_v0(spec: str, net: NetworkParams, seed) -> np.ndarray:
    if spec == "zero":
        return np.zeros(net.n)
    if spec == "random":
        if seed is None:
            raise ValidationError("--v0 random requires --seed")
        v_min, v_max = compute_bounds(net)
        return np.random.default_rng(seed).uniform(v_min, v_max, net.n)
    try:
        v0 = np.array([float(x) for x in spec.split(",")], dtype=np.float64)
    except ValueError as e:
        raise ValidationError(f"bad v0 spec {spec!r}: {e}") from e
    if v0.shape != (net.n,):
        raise ValidationError(f"v0 has length {v0.size}, network has N={net.n}")
    return v0


def _base_config(args, command: str, keys: list[str]) -> dict:
    config = {"command": command, "version": __version__}
    for key in keys:
        config[key] = getattr(args, key.replace("-", "_"))
    return config


def _cmd_simulate(args) -> int:
    net = fileio.read_network(args.net)
    v0 = _parse_v0(args.v0, net, args.seed)
    rng = np.random.default_rng(args.seed) if args.noise > 0 else None
    if args.noise > 0 and args.seed is None:
        raise ValidationError("--noise requires --seed")
    traj = simulate(net, v0, args.t_max, sigma_b=args.noise, rng=rng)
    config = _base_config(args, "simulate", ["net", "v0", "t_max", "noise", "seed"])
    fileio.write_trajectory_csv(args.out + ".csv", traj, config)
    fileio.write_raster_text(args.out + ".raster", traj.raster)
    print(f"wrote {args.out}.csv and {args.out}.raster ({len(traj)} steps, N={net.n})")
    return 0


def _cmd_graph(args) -> int:
    net = fileio.read_network(args.net)
    graph = build_transition_graph(net, cap=args.cap)
    config = _base_config(args, "graph", ["net", "cap", "include_illegal"])
    fileio.write_graph_json(args.out, graph, include_illegal=args.include_illegal, config=config)
    counts = graph.counts()
    print(
        f"unconditional={counts['unconditional']} "
        f"conditional={counts['conditional']} illegal={counts['illegal']}"
    )
    return 0


def _cmd_orbit(args) -> int:
    net = fileio.read_network(args.net)
    rng = np.random.default_rng(args.seed)
    sample = omega_sample(
        net,
        args.inits,
        rng,
        max_transient=args.max_transient,
        max_period=args.max_period,
        tol=args.tol,
        polish_steps=args.polish,
        threads=args.threads,
    )
    regime = classify_regime(
        net, sample.orbits, sample.undetermined,
        epsilon_singular=args.eps_singular, horizon=sample.horizon,
    )
    d_as = dist_attractor_to_S(sample.orbits) if sample.orbits else None
    config = _base_config(args, "orbit", [
        "net", "inits", "max_transient", "max_period", "tol", "seed", "eps_singular",
    ])
    fileio.write_orbits_json(
        args.out, sample.orbits, regime, d_as, sample.undetermined,
        config=config, include_states=args.include_states,
    )
    d_repr = fileio.fmt_float(d_as) if d_as is not None else "nan"
    print(
        f"regime={regime} orbits={len(sample.orbits)} dAS={d_repr} "
        f"undetermined={sample.undetermined}"
    )
    return 0


def _cmd_sweep(args) -> int:
    gammas = _parse_grid(args.gammas)
    cs = _parse_grid(args.cs)

    def progress(done, total, cell):
        print(
            f"cell {done}/{total} gamma={cell.gamma:g} c={cell.c:g} "
            f"death={cell.death_fraction:g} log10_d={cell.log10_d_as:g}",
            file=sys.stderr,
        )

    cells = sweep(
        gammas, cs, args.n, args.networks, args.inits,
        max_transient=args.max_transient, max_period=args.max_period,
        tol=args.tol, theta=args.theta, i_ext=args.i_ext,
        seed=args.seed, threads=args.threads, progress=progress,
    )
    config = _base_config(args, "sweep", [
        "n", "gammas", "cs", "networks", "inits", "theta", "i_ext",
        "max_transient", "max_period", "tol", "seed",
    ])
    fileio.write_sweep_csv(args.out + ".csv", cells, config)
    fileio.write_heatmap_csv(args.out + ".heatmap.csv", cells, gammas, cs, config)
    print(f"wrote {args.out}.csv and {args.out}.heatmap.csv ({len(cells)} cells)")
    return 0


def _cmd_lyap(args) -> int:
    if (args.net is None) == (args.gammas is None):
        raise ValidationError("lyap needs exactly one of --net or ensemble flags (--gammas/--cs/--n)")
    if args.net is not None:
        net = fileio.read_network(args.net)
        rng = np.random.default_rng(args.seed)
        v_min, v_max = compute_bounds(net)
        config = _base_config(args, "lyap", [
            "net", "inits", "ball", "horizon", "burn_in", "directions", "seed",
        ])
        rows = []
        for k in range(args.inits):
            v0 = rng.uniform(v_min, v_max, net.n)
            lam = effective_lyapunov(
                net, v0, args.ball, args.directions, args.horizon, rng, burn_in=args.burn_in,
            )
            rows.append((k, lam))
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write("".join(f"# {k}={v}\n" for k, v in config.items()))
            f.write("init,lyapunov\n")
            for k, lam in rows:
                f.write(f"{k},{fileio.fmt_float(lam)}\n")
        mean = float(np.mean([lam for _, lam in rows]))
        print(f"lambda_mean={fileio.fmt_float(mean)} inits={args.inits}")
        return 0
    if args.cs is None or args.n is None:
        raise ValidationError("ensemble lyap requires --gammas, --cs, and --n")
    gammas = _parse_grid(args.gammas)
    cs = _parse_grid(args.cs)
    cells = lyapunov_map(
        gammas, cs, args.n, args.networks, args.inits, args.ball, args.horizon,
        num_directions=args.directions, burn_in=args.burn_in,
        theta=args.theta, i_ext=args.i_ext, seed=args.seed, threads=args.threads,
    )
    config = _base_config(args, "lyap", [
        "n", "gammas", "cs", "networks", "inits", "ball", "horizon",
        "burn_in", "directions", "theta", "i_ext", "seed",
    ])
    fileio.write_lyap_csv(args.out, cells, config)
    print(f"wrote {args.out} ({len(cells)} cells)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikemap",
        description="Simulate and analyse discrete-time threshold networks.",
    )
    parser.add_argument("--version", action="version", version=f"spikemap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="iterate the map and dump trajectory + raster")
    p.add_argument("--net", required=True, help="network JSON file")
    p.add_argument("--v0", default="zero", help="'zero', 'random', or comma-separated values")
    p.add_argument("--t-max", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise std per step")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output prefix (.csv and .raster)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("graph", help="classify all pattern transitions")
    p.add_argument("--net", required=True)
    p.add_argument("--cap", type=int, default=16, help="max N for 2^N enumeration")
    p.add_argument("--include-illegal", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_graph)

    p = sub.add_parser("orbit", help="sample long-run orbits and classify the regime")
    p.add_argument("--net", required=True)
    p.add_argument("--inits", type=int, default=20)
    p.add_argument("--max-transient", type=int, default=100_000)
    p.add_argument("--max-period", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--polish", type=int, default=20_000)
    p.add_argument("--eps-singular", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--include-states", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_orbit)

    p = sub.add_parser("sweep", help="random-ensemble sweep over a (gamma, c) grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gammas", required=True, help="comma list or lo:hi:count")
    p.add_argument("--cs", required=True, help="comma list or lo:hi:count")
    p.add_argument("--networks", type=int, default=10)
    p.add_argument("--inits", type=int, default=5)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--i-ext", type=float, default=0.0)
    p.add_argument("--max-transient", type=int, default=3_000)
    p.add_argument("--max-period", type=int, default=1_000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output prefix (.csv and .heatmap.csv)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("lyap", help="finite-ball expansion-rate estimates")
    p.add_argument("--net", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--gammas", default=None)
    p.add_argument("--cs", default=None)
    p.add_argument("--networks", type=int, default=5)
    p.add_argument("--inits", type=int, default=3)
    p.add_argument("--ball", type=float, default=1e-3)
    p.add_argument("--horizon", type=int, default=1_000)
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--directions", type=int, default=8)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--i-ext", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_lyap)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except CapacityError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (ValidationError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
