"""Self-describing file formats: network JSON, trajectory CSV, raster text,
transition-graph JSON, orbit-report JSON, and sweep/heatmap CSV.

Every CSV starts with ``# key=value`` comment lines echoing the effective
configuration, floats are written in shortest round-trip form, and each
writer has a reader that reproduces the in-memory objects exactly.
"""

from __future__ import annotations

import json
import math
from typing import Optional

import numpy as np

from .model import NetworkParams, Trajectory, ValidationError
from .coding import TransitionGraph, pattern_to_str, str_to_pattern
from .orbits import OrbitReport, RegimeLabel
from .ensemble import LyapCell, SweepCell

__all__ = [
    "fmt_float",
    "write_network",
    "read_network",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_raster_text",
    "read_raster_text",
    "write_graph_json",
    "read_graph_json",
    "write_orbits_json",
    "read_orbits_json",
    "write_sweep_csv",
    "read_sweep_csv",
    "write_heatmap_csv",
    "write_lyap_csv",
]


def fmt_float(x: float) -> str:
    """Shortest decimal that parses back to the identical float."""
    return repr(float(x))


def _config_lines(config: Optional[dict]) -> str:
    if not config:
        return ""
    return "".join(f"# {k}={v}\n" for k, v in config.items())


def _read_config(lines: list[str]) -> dict:
    config = {}
    for line in lines:
        body = line[1:].strip()
        key, _, value = body.partition("=")
        config[key] = value
    return config


def write_network(path, net: NetworkParams) -> None:
    payload = {
        "n": net.n,
        "gamma": net.gamma,
        "theta": net.theta,
        "weights": [[float(x) for x in row] for row in net.weights],
        "i_ext": [float(x) for x in net.i_ext],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def read_network(path) -> NetworkParams:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError(f"malformed network file {path}: {e}") from e
    try:
        return NetworkParams(
            n=payload["n"],
            gamma=payload["gamma"],
            theta=payload["theta"],
            weights=np.asarray(payload["weights"], dtype=np.float64),
            i_ext=np.asarray(payload["i_ext"], dtype=np.float64),
        )
    except (KeyError, TypeError) as e:
        raise ValidationError(f"network file {path} is missing or mistypes a field: {e}") from e


def write_trajectory_csv(path, traj: Trajectory, config: Optional[dict] = None) -> None:
    n = traj.net.n
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(_config_lines(config))
        f.write("t," + ",".join(f"v_{i}" for i in range(n)) + "\n")
        for t in range(len(traj)):
            f.write(str(t) + "," + ",".join(fmt_float(x) for x in traj.states[t]) + "\n")


def read_trajectory_csv(path) -> tuple[dict, np.ndarray, np.ndarray]:
    """Returns (config, times, states)."""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    rows = [ln for ln in lines if ln and not ln.startswith("#")]
    if not rows:
        raise ValidationError(f"trajectory file {path} has no data")
    header = rows[0].split(",")
    if header[0] != "t":
        raise ValidationError(f"trajectory file {path} has an unexpected header")
    times = []
    states = []
    for row in rows[1:]:
        parts = row.split(",")
        times.append(int(parts[0]))
        states.append([float(x) for x in parts[1:]])
    return _read_config(comments), np.asarray(times), np.asarray(states, dtype=np.float64)


def write_raster_text(path, raster) -> None:
    raster = np.atleast_2d(np.asarray(raster, dtype=np.uint8))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for row in raster:
            f.write(pattern_to_str(row) + "\n")


def read_raster_text(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.strip() for ln in f if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValidationError(f"raster file {path} is empty")
    width = len(lines[0])
    if any(len(ln) != width for ln in lines):
        raise ValidationError(f"raster file {path} has ragged lines")
    return np.stack([str_to_pattern(ln) for ln in lines])


def write_graph_json(
    path, graph: TransitionGraph, include_illegal: bool = False, config: Optional[dict] = None
) -> None:
    edges = [
        {
            "from": pattern_to_str(graph.pattern(a)),
            "to": pattern_to_str(graph.pattern(b)),
            "kind": kind,
        }
        for a, b, kind in graph.iter_edges(include_illegal=include_illegal)
    ]
    payload = {"n": graph.n, "edges": edges}
    if config:
        payload["config"] = {k: str(v) for k, v in config.items()}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def read_graph_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_orbits_json(
    path,
    orbits: list[OrbitReport],
    regime: RegimeLabel,
    d_as: Optional[float],
    undetermined: int,
    config: Optional[dict] = None,
    include_states: bool = False,
) -> None:
    items = []
    for o in orbits:
        item = {
            "transient": o.transient,
            "period": o.period,
            "min_threshold_gap": o.min_threshold_gap,
            "cycle_raster": [pattern_to_str(row) for row in o.cycle_raster],
        }
        if include_states:
            item["states"] = [[float(x) for x in row] for row in o.states]
        items.append(item)
    payload = {
        "regime": str(regime),
        "d_as": d_as,
        "undetermined": undetermined,
        "orbits": items,
    }
    if config:
        payload["config"] = {k: str(v) for k, v in config.items()}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def read_orbits_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


SWEEP_HEADER = "gamma,c,samples,avg_d_as,log10_d_as,death_fraction,avg_period,undetermined_fraction"


def write_sweep_csv(path, cells: list[SweepCell], config: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(_config_lines(config))
        f.write(SWEEP_HEADER + "\n")
        for cell in cells:
            f.write(",".join([
                fmt_float(cell.gamma),
                fmt_float(cell.c),
                str(cell.samples),
                fmt_float(cell.avg_d_as),
                fmt_float(cell.log10_d_as),
                fmt_float(cell.death_fraction),
                fmt_float(cell.avg_period),
                fmt_float(cell.undetermined_fraction),
            ]) + "\n")


def read_sweep_csv(path) -> tuple[dict, list[SweepCell]]:
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    rows = [ln for ln in lines if ln and not ln.startswith("#")]
    if not rows or rows[0] != SWEEP_HEADER:
        raise ValidationError(f"sweep file {path} has an unexpected header")
    cells = []
    for row in rows[1:]:
        g, c, samples, avg_d, log_d, death, period, undet = row.split(",")
        cells.append(SweepCell(
            gamma=float(g), c=float(c), samples=int(samples),
            avg_d_as=float(avg_d), log10_d_as=float(log_d),
            death_fraction=float(death), avg_period=float(period),
            undetermined_fraction=float(undet),
        ))
    return _read_config(comments), cells


def write_heatmap_csv(path, cells: list[SweepCell], gammas, cs, config: Optional[dict] = None) -> None:
    """log10 attractor-distance matrix, gamma rows by c columns, for direct plotting."""
    value = {(cell.gamma, cell.c): cell.log10_d_as for cell in cells}
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(_config_lines(config))
        f.write("gamma\\c," + ",".join(fmt_float(c) for c in cs) + "\n")
        for g in gammas:
            f.write(fmt_float(g) + "," + ",".join(
                fmt_float(value.get((float(g), float(c)), math.nan)) for c in cs
            ) + "\n")


def write_lyap_csv(path, cells: list[LyapCell], config: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(_config_lines(config))
        f.write("gamma,c,samples,mean_lyapunov\n")
        for cell in cells:
            f.write(",".join([
                fmt_float(cell.gamma), fmt_float(cell.c),
                str(cell.samples), fmt_float(cell.mean_lyapunov),
            ]) + "\n")
