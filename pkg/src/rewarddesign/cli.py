"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 infeasible design or undefined result.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path


from .discount import REPORT_COLUMNS, subjective_discount
from .environments import (ENVIRONMENTS, REWARD_PRESETS, get_environment, get_reward_preset,
                           load_environment)
from .experiments import FIGURES
from .learning import CURVE_COLUMNS, QLearningConfig, aggregate_runs
from .mdp import RewardVector, action_gap
from .results import write_csv
from .synthesis import SynthesisError, min_subjective_discount_synthesis, synthesize

EXIT_USAGE = 2
EXIT_INFEASIBLE = 3

DEFAULTS = {
    "env": "chain60", "reward": None, "gamma": None, "gamma_tilde": None, "floor": 0.01,
    "threshold": 0.01, "steps": 10_000, "runs": 1, "seed": 0, "out": None, "workers": 1,
    "alpha": 0.5, "epsilon": 0.1, "minimize": False, "above_gamma": False,
}

FIGURE_RUNS = {"fig2": 200, "fig3": 500, "fig4": 200, "fig5": 200}


class UsageError(Exception):
    pass


def load_reward_file(path) -> RewardVector:
    """One weight per line, optionally preceded by a feature name; ``#`` comments."""
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line.split()[-1]))
        except ValueError:
            raise UsageError(f"{path}:{lineno}: not a number: {line!r}") from None
    return RewardVector(values)


def save_reward_file(path, reward: RewardVector, names) -> None:
    Path(path).write_text("".join(f"{nm} {float(w)!r}\n" for nm, w in zip(names, reward.weights)))


def _environment(opts):
    name = opts["env"]
    if name in ENVIRONMENTS:
        return get_environment(name)
    if Path(name).is_file():
        return load_environment(name)
    raise UsageError(f"unknown environment {name!r}; presets: {', '.join(sorted(ENVIRONMENTS))}")


def _reward(opts, mdp, pi, gamma):
    spec = opts["reward"]
    if spec is None:
        raise UsageError("--reward is required")
    if spec == "lp":
        if opts["gamma_tilde"] is not None:
            return synthesize(mdp, pi, gamma, opts["gamma_tilde"]).reward
        return min_subjective_discount_synthesis(mdp, pi, gamma, opts["floor"])[0].reward
    if spec in REWARD_PRESETS.get(opts["env"], {}):
        return get_reward_preset(opts["env"], spec)
    if Path(spec).is_file():
        reward = load_reward_file(spec)
        if len(reward) != mdp.n_features:
            raise UsageError(f"reward file has {len(reward)} weights, environment has "
                             f"{mdp.n_features} features")
        return reward
    known = sorted(REWARD_PRESETS.get(opts["env"], {}))
    raise UsageError(f"unknown reward {spec!r} for {opts['env']!r}; presets: {known}, 'lp', or a file")


def _fmt(x) -> str:
    return repr(float(x))


def cmd_gap(opts) -> int:
    mdp, pi = _environment(opts)
    gamma = opts["gamma"] if opts["gamma"] is not None else mdp.objective_discount
    print(_fmt(action_gap(mdp, _reward(opts, mdp, pi, gamma), pi, gamma)))
    return 0


def cmd_subjective(opts) -> int:
    mdp, pi = _environment(opts)
    gamma = opts["gamma"] if opts["gamma"] is not None else mdp.objective_discount
    rep = subjective_discount(mdp, _reward(opts, mdp, pi, gamma), pi, gamma, opts["threshold"],
                              search_above=opts["above_gamma"])
    if opts["out"]:
        write_csv(opts["out"], "subjective-discount", REPORT_COLUMNS, rep.rows())
    if not rep.defined:
        print("undefined")
        return EXIT_INFEASIBLE
    print(_fmt(rep.gamma_tilde))
    return 0


def cmd_synthesize(opts) -> int:
    mdp, pi = _environment(opts)
    gamma = opts["gamma"] if opts["gamma"] is not None else mdp.objective_discount
    if opts["minimize"]:
        res, gt = min_subjective_discount_synthesis(mdp, pi, gamma, opts["floor"])
    else:
        gt = opts["gamma_tilde"] if opts["gamma_tilde"] is not None else gamma
        res = synthesize(mdp, pi, gamma, gt)
    print("reward: " + " ".join(f"{nm}={w:.6g}" for nm, w in zip(mdp.feature_names, res.reward.weights)))
    print(f"gamma_tilde: {gt!r}")
    print(f"delta: {res.delta!r}")
    print(f"objective_gap: {res.objective_gap!r}")
    print(f"subjective_gap: {res.subjective_gap!r}")
    if opts["out"]:
        save_reward_file(opts["out"], res.reward, mdp.feature_names)
    return 0


def _learning_config(opts) -> QLearningConfig:
    return QLearningConfig(steps=opts["steps"], learning_rate=opts["alpha"],
                           epsilon=opts["epsilon"], seed=opts["seed"])


def cmd_learn(opts) -> int:
    mdp, pi = _environment(opts)
    gamma = opts["gamma"] if opts["gamma"] is not None else mdp.objective_discount
    reward = _reward(opts, mdp, pi, gamma)
    curve = aggregate_runs(mdp, reward, pi, gamma, _learning_config(opts), opts["runs"],
                           opts["workers"])
    out = opts["out"] or "-"
    if out == "-":
        print("# schema: learning-curve v1")
        print(",".join(CURVE_COLUMNS))
        for row in curve.rows():
            print(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    else:
        write_csv(out, "learning-curve", CURVE_COLUMNS, curve.rows())
    return 0


def cmd_reproduce(opts) -> int:
    figure = opts["figure"]
    out = Path(opts["out"] or f"results/{figure}")
    runs = opts["runs"] if opts["runs_given"] else FIGURE_RUNS[figure]
    cfg = _learning_config(opts)
    kwargs = {"runs": runs}
    if figure == "fig2":
        kwargs.update(seed=opts["seed"], pin_terminals=opts["pin_terminals"])
        if opts["samples"] is not None:
            kwargs["samples"] = opts["samples"]
    else:
        kwargs["workers"] = opts["workers"]
    lines = FIGURES[figure](out, cfg, **kwargs)
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text)
    sys.stdout.write(text)
    return 0


COMMANDS = {"gap": cmd_gap, "subjective": cmd_subjective, "synthesize": cmd_synthesize,
            "learn": cmd_learn, "reproduce": cmd_reproduce}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror the long flags")
    common.add_argument("--env", help="environment preset or environment file")
    common.add_argument("--reward", help="reward preset, reward file, or 'lp'")
    common.add_argument("--gamma", type=float, help="objective discount (default: environment's)")
    common.add_argument("--gamma-tilde", type=float, dest="gamma_tilde")
    common.add_argument("--floor", type=float, help="action-gap floor for --minimize / 'lp'")
    common.add_argument("--threshold", type=float, help="gap threshold for the subjective discount")
    common.add_argument("--steps", type=int)
    common.add_argument("--runs", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--alpha", type=float, help="Q-learning step size")
    common.add_argument("--epsilon", type=float, help="exploration probability")
    common.add_argument("--out")
    common.add_argument("--workers", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rewarddesign", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gap", parents=[common], help="action gap of a reward")
    p = sub.add_parser("subjective", parents=[common], help="subjective discount of a reward")
    p.add_argument("--above-gamma", action="store_true", default=None, dest="above_gamma",
                   help="if the gap at gamma is positive but under the threshold, search above gamma")
    p = sub.add_parser("synthesize", parents=[common], help="linear-program reward synthesis")
    p.add_argument("--minimize", action="store_true", default=None,
                   help="search for the smallest feasible subjective discount")
    sub.add_parser("learn", parents=[common], help="Q-learning curve as CSV")
    p = sub.add_parser("reproduce", parents=[common], help="CSV bundle for one figure")
    p.add_argument("figure", choices=sorted(FIGURES))
    p.add_argument("--samples", type=int, help="random-search sample count (fig2)")
    p.add_argument("--pin-terminals", action="store_true", dest="pin_terminals",
                   help="fig2: keep terminal rewards at +1/-1 instead of sampling them")
    return parser


def resolve_options(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    config = {}
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(config) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        opts.update(config)
    given = {k: v for k, v in vars(args).items() if v is not None}
    opts["runs_given"] = "runs" in given or "runs" in config
    opts.update(given)
    opts.setdefault("samples", None)
    opts.setdefault("pin_terminals", False)
    return opts


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = resolve_options(args)
        return COMMANDS[args.command](opts)
    except (UsageError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except SynthesisError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
