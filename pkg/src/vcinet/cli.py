"""Batch command-line interface.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 stability
memory cap exceeded.
"""

import argparse
import csv
import json
import sys
from contextlib import contextmanager

import numpy as np

from .config import ConfigError, parse_config, pendulum_preset
from .harness import CONTROLLERS, episode_seed, monte_carlo, run_episode
from .network import truncated_weights
from .numerics import ConvergenceError, NonUniqueStationaryError, stationary_distribution
from .plant import lqr_design
from .stability import MemoryCapError, closed_loop_modes, mss_check
from .vci import DegenerateWeightsError, build_augmented_gain, build_transition_matrix

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_MEMORY = 0, 2, 3, 4


@contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _load(args):
    if args.config is None:
        raise ConfigError("--config is required for this subcommand")
    cfg = parse_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "runs", None) is not None:
        cfg.runs = args.runs
    if getattr(args, "controller", None) is not None:
        cfg.controller = args.controller
        cfg.controllers = [args.controller]
    return cfg


def cmd_design(args):
    cfg = _load(args)
    plant = cfg.build_plant()
    design = lqr_design(plant.a, plant.b, cfg.cost["q"], cfg.cost["r"])
    doc = {"gain": design.gain.tolist(), "riccati": design.riccati.tolist(),
           "closed_loop_radius": float(max(abs(np.linalg.eigvals(plant.a + plant.b @ design.gain))))}
    with _sink(args.out) as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def cmd_stability(args):
    cfg = _load(args)
    plant = cfg.build_plant()
    gain = cfg.build_gain(plant)
    p = build_transition_matrix(truncated_weights(cfg.build_delay(), cfg.n_seq))
    try:
        l_tilde = build_augmented_gain(plant, gain, stationary_distribution(p), cfg.n_seq,
                                       cfg.default_input)
    except DegenerateWeightsError as exc:
        raise ConvergenceError(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(f"default_input: {exc}") from exc
    verdict = mss_check(closed_loop_modes(plant, l_tilde, cfg.n_seq, p), cfg.stability_cap)
    with _sink(args.out) as fh:
        json.dump({"mss": bool(verdict.is_mss), "radius": float(verdict.radius),
                   "n_seq": cfg.n_seq, "modes": cfg.n_seq + 2}, fh, indent=2)
        fh.write("\n")


def _trajectory_rows(run, res):
    s, n = res.states.shape[1], res.inputs.shape[1]
    header = (["run", "k"] + [f"x{i + 1}" for i in range(s)] + [f"u{i + 1}" for i in range(n)]
              + ["theta", "step_cost"])
    rows = []
    for k in range(res.states.shape[0]):
        rows.append([run, k, *map(repr, res.states[k].tolist()), *map(repr, res.inputs[k].tolist()),
                     int(res.theta[k]), repr(float(res.step_costs[k]))])
    return header, rows


def cmd_simulate(args):
    cfg = _load(args)
    runs = args.runs if args.runs is not None else 1
    out = args.out or cfg.output.get("trajectory_csv")
    with _sink(out) as fh:
        writer = csv.writer(fh)
        for run in range(runs):
            seed = cfg.seed if runs == 1 else episode_seed(cfg.seed, run)
            res = run_episode(cfg.episode_config(seed=seed))
            header, rows = _trajectory_rows(run, res)
            if run == 0:
                writer.writerow(header)
            writer.writerows(rows)
            print(f"run {run}: cost {res.cost:.6g}", file=sys.stderr)


def cmd_montecarlo(args):
    cfg = _load(args)
    controllers = list(cfg.controllers)
    if cfg.weight_mode == "filtered":
        controllers = ["vci-filtered" if c == "vci" else c for c in controllers]
    summary, costs = [], []
    for sigma in cfg.sigma_values:
        ep = cfg.episode_config(controller=controllers[0], noise_std=sigma)
        stats = monte_carlo(ep, cfg.runs, controllers, cfg.workers)
        label = "" if sigma is None else repr(float(sigma))
        for name in controllers:
            st = stats[name]
            summary.append([name, label, st.runs, repr(st.mean), repr(st.std_error)])
            costs.extend([name, label, r, repr(float(c))] for r, c in enumerate(st.costs))
    out = args.out or cfg.output.get("summary_csv")
    with _sink(out) as fh:
        writer = csv.writer(fh)
        writer.writerow(["controller", "sigma_w", "runs", "mean_cost", "std_error"])
        writer.writerows(summary)
    if cfg.output.get("costs_csv"):
        with _sink(cfg.output["costs_csv"]) as fh:
            writer = csv.writer(fh)
            writer.writerow(["controller", "sigma_w", "run", "cost"])
            writer.writerows(costs)
    if out not in (None, "-"):
        for row in summary:
            print(f"{row[0]:>13} sigma_w={row[1] or '-':<8} mean={float(row[3]):.6g} "
                  f"se={float(row[4]):.3g}", file=sys.stderr)


def cmd_pendulum(args):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.controller is not None:
        overrides["controller"] = args.controller
    with _sink(args.out) as fh:
        json.dump(pendulum_preset(**overrides), fh, indent=2)
        fh.write("\n")


def build_parser():
    parser = argparse.ArgumentParser(prog="vcinet",
                                     description="Networked control with virtual control inputs.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--runs", type=int, help="number of Monte Carlo runs")
    common.add_argument("--controller", choices=CONTROLLERS)
    common.add_argument("--out", help="output path, '-' or omitted for stdout")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, text in [
        ("design", cmd_design, "LQR gain for the configured plant and cost"),
        ("stability", cmd_stability, "mean-square stability verdict and radius"),
        ("simulate", cmd_simulate, "simulate episodes and write a trajectory CSV"),
        ("montecarlo", cmd_montecarlo, "paired Monte Carlo cost summary CSV"),
        ("pendulum", cmd_pendulum, "print the cart-pole preset config"),
    ]:
        sp = sub.add_parser(name, parents=[common], help=text, description=text)
        sp.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if args.runs is not None and args.runs < 1:
            raise ConfigError("--runs must be positive")
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, NonUniqueStationaryError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MemoryCapError as exc:
        print(f"memory cap: {exc}", file=sys.stderr)
        return EXIT_MEMORY
    except BrokenPipeError:
        sys.stderr.close()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
