"""Command line front end.

Subcommands: ``state`` (build and serialise a comb state), ``moments``
(arm-aggregated intensity moments), ``identify`` (nonclassicality
identifiers), ``depth`` (Lee depth), ``fig N`` (one of the eight bundled
experiments), ``sweep`` (experiment with a config file).

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import montecarlo
from .depth import tau_eigen, tau_m
from .dynamics import (
    FullyOverlappingTopology,
    NonOverlappingTopology,
    comb_nonoverlapping,
    comb_overlapping,
    coupling_time_for_gain,
    propagate_seed,
)
from .identifiers import identify
from .moments import apply_efficiency, arm_moments
from .state import Bipartition, GaussianCombState, add_thermal_noise, state_to_json

_ENV_THREADS = "QOFC_DEFAULT_THREADS"


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValueError(f"cannot parse float list {text!r}: {exc}") from exc


def _parse_seed_spectrum(text: str, n_modes: int) -> np.ndarray:
    path = Path(text)
    if path.is_file():
        doc = json.loads(path.read_text())
        values = [complex(p[0], p[1]) for p in doc]
    else:
        try:
            values = [complex(x.strip()) for x in text.split(",") if x.strip()]
        except ValueError as exc:
            raise ValueError(f"cannot parse seed spectrum {text!r}: {exc}") from exc
    if len(values) != n_modes:
        raise ValueError(
            f"seed spectrum has {len(values)} entries but the comb has {n_modes} modes"
        )
    return np.asarray(values, dtype=complex)


def _parse_bipartition(text: str) -> Bipartition:
    try:
        part_s, part_i = text.split(";")
        s = tuple(int(x) for x in part_s.split(",") if x.strip())
        i = tuple(int(x) for x in part_i.split(",") if x.strip())
    except ValueError as exc:
        raise ValueError(
            f"bipartition must look like '0,2;1,3' (signal;idler), got {text!r}"
        ) from exc
    return Bipartition(s, i)


def _parse_eta(text: str) -> tuple[float, float]:
    values = _parse_float_list(text)
    if len(values) != 2:
        raise ValueError("--eta needs exactly two values: eta_s,eta_i")
    return values[0], values[1]


_TOPOLOGY_CONFIG_KEYS = {
    "type", "gains", "n_modes", "gt", "noise", "seed_spectrum", "bipartition", "eta",
}


def _topology_doc(args: argparse.Namespace) -> dict:
    """Merge the optional config file with the flags; flags win."""
    if args.pairs is not None and args.overlap is not None:
        raise ValueError("--pairs and --overlap are mutually exclusive")
    doc: dict = {}
    if getattr(args, "config", None):
        doc = _load_config_file(args.config)
        unknown = set(doc) - _TOPOLOGY_CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if doc.get("type") not in (None, "pairs", "overlap"):
            raise ValueError(f"config field 'type' must be 'pairs' or 'overlap', "
                             f"got {doc.get('type')!r}")
    if args.pairs is not None:
        doc["type"] = "pairs"
        doc["gains"] = _parse_float_list(args.pairs)
    if args.overlap is not None:
        doc["type"] = "overlap"
        doc["n_modes"] = args.overlap
    if args.gt is not None:
        doc["gt"] = args.gt
    if args.noise:
        doc["noise"] = _parse_float_list(args.noise)
    if args.seed_spectrum:
        doc["seed_spectrum"] = args.seed_spectrum
    if getattr(args, "bipartition", None):
        doc["bipartition"] = args.bipartition
    if getattr(args, "eta", None):
        doc["eta"] = list(_parse_eta(args.eta))
    return doc


def _seed_vector(value, n_modes: int) -> np.ndarray:
    if isinstance(value, str):
        return _parse_seed_spectrum(value, n_modes)
    values = [complex(p[0], p[1]) for p in value]  # array of [re, im] pairs
    if len(values) != n_modes:
        raise ValueError(
            f"seed spectrum has {len(values)} entries but the comb has {n_modes} modes"
        )
    return np.asarray(values, dtype=complex)


def _build_state(doc: dict) -> GaussianCombState:
    kind = doc.get("type")
    if kind == "pairs":
        if doc.get("gt") is not None:
            raise ValueError("gt only applies to the overlap topology")
        gains = [float(g) for g in doc.get("gains", [])]
        if not gains:
            raise ValueError("pairs topology needs a non-empty 'gains' list")
        state = comb_nonoverlapping(gains)
        topology: NonOverlappingTopology | FullyOverlappingTopology = NonOverlappingTopology(
            tuple((2 * k, 2 * k + 1, float(coupling_time_for_gain(g))) for k, g in enumerate(gains))
        )
        t = 1.0
    elif kind == "overlap":
        if doc.get("gt") is None:
            raise ValueError("overlap topology requires gt (--gt or config field)")
        n_modes = int(doc.get("n_modes", 0))
        state = comb_overlapping(n_modes, float(doc["gt"]))
        topology = FullyOverlappingTopology(n_modes, 1.0)
        t = float(doc["gt"])
    else:
        raise ValueError("choose a topology: --pairs, --overlap N --gt X, or a config file")
    if doc.get("seed_spectrum") is not None:
        xi0 = _seed_vector(doc["seed_spectrum"], state.n_modes)
        xi_t = propagate_seed(topology, t, xi0)
        state = GaussianCombState(state.cov, xi_t, dict(state.meta, seeded=True))
    if doc.get("noise") is not None:
        n_bar = [float(x) for x in doc["noise"]]
        if len(n_bar) == 1:
            n_bar = n_bar * state.n_modes
        state = add_thermal_noise(state, np.asarray(n_bar))
    return state


def _bipartition_from(doc: dict, state: GaussianCombState) -> Bipartition:
    spec = doc.get("bipartition")
    if spec is not None:
        if isinstance(spec, str):
            return _parse_bipartition(spec)
        return Bipartition(tuple(int(j) for j in spec[0]), tuple(int(j) for j in spec[1]))
    if state.n_modes == 2:
        return Bipartition((0,), (1,))
    if doc.get("type") == "pairs":
        evens = tuple(range(0, state.n_modes, 2))
        odds = tuple(range(1, state.n_modes, 2))
        return Bipartition(evens, odds)
    raise ValueError("--bipartition is required for multimode overlap combs")


def _fmt(v: float) -> str:
    return format(v, ".17g")


def _cmd_state(args: argparse.Namespace) -> int:
    state = _build_state(_topology_doc(args))
    text = state_to_json(state, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote state to {args.out}", file=sys.stderr)
    else:
        print(text)
    return 0


def _arm_moments_for(args: argparse.Namespace):
    doc = _topology_doc(args)
    state = _build_state(doc)
    moments = arm_moments(state, _bipartition_from(doc, state))
    if doc.get("eta") is not None:
        moments = apply_efficiency(moments, float(doc["eta"][0]), float(doc["eta"][1]))
    return moments


def _cmd_moments(args: argparse.Namespace) -> int:
    moments = _arm_moments_for(args)
    fields = ("w_s", "w_i", "var_s", "var_i", "cov_si", "second_s", "second_i", "cross_sq")
    if args.json:
        print(json.dumps({f: getattr(moments, f) for f in fields}, indent=2))
    else:
        for f in fields:
            print(f"{f} = {_fmt(getattr(moments, f))}")
    return 0


def _cmd_identify(args: argparse.Namespace) -> int:
    result = identify(_arm_moments_for(args))
    if args.json:
        print(json.dumps({"e1": result.e1, "e2": result.e2, "verdict": result.verdict}, indent=2))
    else:
        print(f"e1 = {_fmt(result.e1)}")
        print(f"e2 = {_fmt(result.e2)}")
        print(f"verdict = {result.verdict}")
    return 0


def _cmd_depth(args: argparse.Namespace) -> int:
    doc = _topology_doc(args)
    state = _build_state(doc)
    if state.n_modes == 2 and doc.get("bipartition") is None:
        result = tau_eigen(state)
    else:
        result = tau_m(arm_moments(state, _bipartition_from(doc, state)))
    if args.json:
        print(json.dumps({"tau": result.tau, "method": result.method}, indent=2))
    else:
        print(f"tau = {_fmt(result.tau)}")
        print(f"method = {result.method}")
    return 0


def _resolve_threads(args: argparse.Namespace) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(_ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ValueError(f"{_ENV_THREADS} must be an integer, got {env!r}") from exc
    return 1


def _run_config(cfg: montecarlo.SweepConfig, args: argparse.Namespace) -> int:
    if args.json:
        text = montecarlo.records_to_json(cfg)
        if cfg.out:
            Path(cfg.out).write_text(text + "\n")
            print(f"wrote records to {cfg.out}", file=sys.stderr)
        else:
            print(text)
        return 0
    out = cfg.out or f"{cfg.experiment}.csv"
    with open(out, "w", newline="") as fh:
        n = montecarlo.write_csv(cfg, fh)
    print(f"wrote {n} records to {out}", file=sys.stderr)
    return 0


def _cmd_fig(args: argparse.Namespace) -> int:
    overrides: dict = {"seed": args.seed, "threads": _resolve_threads(args)}
    if args.samples is not None:
        overrides["samples"] = args.samples
    if args.out is not None:
        overrides["out"] = args.out
    cfg = montecarlo.default_config(f"fig{args.n}", **overrides)
    return _run_config(cfg, args)


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ValueError(f"config file {path!r} not found")
    if p.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError as exc:
            raise ValueError("TOML configs need Python 3.11+; use JSON instead") from exc
        return tomllib.loads(p.read_text())
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _cmd_sweep(args: argparse.Namespace) -> int:
    doc = _load_config_file(args.config)
    if args.samples is not None:
        doc["samples"] = args.samples
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out is not None:
        doc["out"] = args.out
    if args.threads is not None:
        doc["threads"] = args.threads
    elif "threads" not in doc:
        doc["threads"] = _resolve_threads(args)
    cfg = montecarlo.config_from_dict(doc)
    return _run_config(cfg, args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qofc",
        description="Gaussian frequency-comb states, intensity-moment "
        "nonclassicality identifiers and seeded Monte Carlo experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    topo = argparse.ArgumentParser(add_help=False)
    topo.add_argument("--config", metavar="PATH",
                      help="JSON or TOML file with type/gains/n_modes/gt/noise/"
                           "seed_spectrum/bipartition/eta; flags override it")
    topo.add_argument("--pairs", metavar="B_P[,B_P...]",
                      help="pair comb with these gains, mode order s1,i1,s2,i2,...")
    topo.add_argument("--overlap", type=int, metavar="N", help="all-to-all comb with N modes")
    topo.add_argument("--gt", type=float, help="interaction parameter for --overlap")
    topo.add_argument("--noise", metavar="LIST",
                      help="per-mode thermal occupations (single value broadcasts)")
    topo.add_argument("--seed-spectrum", metavar="FILE|LIST",
                      help="coherent seed amplitudes at t=0, propagated through the comb")

    analysis = argparse.ArgumentParser(add_help=False)
    analysis.add_argument("--bipartition", metavar="S;I", help="e.g. '0,2;1,3'")
    analysis.add_argument("--json", action="store_true", help="machine readable output")

    p_state = sub.add_parser("state", parents=[topo], help="build a state and print its JSON")
    p_state.add_argument("--out", metavar="PATH")
    p_state.set_defaults(func=_cmd_state)

    p_mom = sub.add_parser("moments", parents=[topo, analysis], help="arm intensity moments")
    p_mom.add_argument("--eta", metavar="S,I", help="detector efficiencies")
    p_mom.set_defaults(func=_cmd_moments)

    p_id = sub.add_parser("identify", parents=[topo, analysis],
                          help="nonclassicality identifiers e1, e2 and the verdict")
    p_id.add_argument("--eta", metavar="S,I", help="detector efficiencies")
    p_id.set_defaults(func=_cmd_identify)

    p_depth = sub.add_parser("depth", parents=[topo, analysis], help="Lee nonclassicality depth")
    p_depth.set_defaults(func=_cmd_depth)

    run_opts = argparse.ArgumentParser(add_help=False)
    run_opts.add_argument("--samples", type=int, default=None)
    run_opts.add_argument("--seed", type=int, default=42)
    run_opts.add_argument("--threads", type=int, default=None,
                          help=f"worker threads (default: ${_ENV_THREADS} or 1)")
    run_opts.add_argument("--out", metavar="PATH", default=None)
    run_opts.add_argument("--json", action="store_true", help="emit a JSON records array")

    p_fig = sub.add_parser("fig", parents=[run_opts], help="run one of the bundled experiments")
    p_fig.add_argument("n", type=int, choices=range(1, 9), metavar="N", help="experiment number 1..8")
    p_fig.set_defaults(func=_cmd_fig)

    p_sweep = sub.add_parser("sweep", parents=[run_opts], help="run an experiment from a config file")
    p_sweep.add_argument("--config", required=True, metavar="PATH", help="JSON or TOML config")
    p_sweep.set_defaults(seed=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"qofc: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
