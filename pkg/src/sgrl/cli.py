"""Command-line entry point for every pipeline stage.

Config handling: subcommands that train accept --config (a JSON file with
an ExperimentConfig payload) plus --set key=value overrides; the effective
config is always written next to the outputs so a run can be reproduced
from its artifacts alone.
"""

import argparse
import json
import os
import sys

import numpy as np

from .agents.collect import collect_successes, load_dataset, save_dataset
from .agents.rule import RulePolicy
from .config import ExperimentConfig
from .dialog.kb import generate_kb, load_kb, save_kb
from .experiment import (build_trainer, derive_seed, evaluate_agent,
                         run_experiment, save_agent_checkpoint, _write_curve)
from .hrl.training import train_agent
from .sim.env import DialogueEnv
from .subgoal.estimator import SubgoalDiscoveryNetwork
from .visualize import visualize_segments

MODES = ("rl", "h-hrl", "m-hrl")


def _parse_set(pairs):
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError("--set expects key=value, got %r" % pair)
        key, raw = pair.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _load_config(args):
    if getattr(args, "smoke", False):
        config = ExperimentConfig.smoke()
    elif getattr(args, "config", None):
        config = ExperimentConfig.load(args.config)
    else:
        config = ExperimentConfig()
    overrides = _parse_set(getattr(args, "set", None))
    if overrides:
        config = config.with_overrides(overrides)
    return config.validate()


def cmd_gen_kb(args):
    kb = generate_kb(args.seed, n_flights=args.flights, n_hotels=args.hotels)
    save_kb(kb, args.out)
    print("wrote %s (%d flights, %d hotels)" % (args.out, args.flights,
                                                args.hotels))
    return 0


def cmd_collect(args):
    env = DialogueEnv(load_kb(args.kb), turn_cap=args.turn_cap)
    episodes, attempts = collect_successes(env, RulePolicy(), args.n,
                                           master_seed=args.seed)
    save_dataset(episodes, args.out,
                 meta={"seed": args.seed, "requested": args.n,
                       "episodes": attempts, "turn_cap": args.turn_cap})
    print("wrote %s (%d successes from %d episodes)" % (args.out,
                                                        len(episodes),
                                                        attempts))
    return 0


def cmd_train_sdn(args):
    config = _load_config(args)
    episodes = load_dataset(args.dataset)
    trajs = [np.asarray(ep.states, dtype=np.float64) for ep in episodes]
    n_train = int(len(trajs) * config.train_frac)
    sdn = SubgoalDiscoveryNetwork(
        latent_slots=config.latent_slots, hidden_size=config.sdn_hidden,
        max_segments=config.max_segments, learning_rate=config.sdn_lr,
        batch_size=config.sdn_batch, max_steps=config.sdn_steps,
        anneal_temp=config.anneal_temp, anneal_frac=config.anneal_frac,
        seed=derive_seed(config.master_seed, 0x5D4) % (2 ** 31),
        verbose=args.verbose)
    sdn.fit(trajs[:n_train], validation=trajs[n_train:])
    sdn.save(args.out, extra_meta={"config": config.config_hash()})
    config.save(args.out + ".config.json")
    print("wrote %s (trained on %d of %d dialogues)" % (args.out, n_train,
                                                        len(trajs)))
    return 0


def cmd_segment(args):
    sdn = SubgoalDiscoveryNetwork.load(args.sdn)
    episodes = load_dataset(args.dataset)
    if args.limit is not None:
        episodes = episodes[:args.limit]
    visualize_segments(sdn, episodes, args.out, threshold=args.threshold)
    print("wrote %s (%d dialogues)" % (args.out, len(episodes)))
    return 0


def cmd_train_hrl(args):
    config = _load_config(args)
    kb = load_kb(args.kb)
    env = DialogueEnv(kb, turn_cap=config.turn_cap)
    sdn = None
    if args.mode == "m-hrl":
        if not args.sdn:
            raise ValueError("m-hrl needs --sdn")
        sdn = SubgoalDiscoveryNetwork.load(args.sdn)
    seed = (args.seed if args.seed is not None
            else derive_seed(config.master_seed, 0x5EED, 0) % (2 ** 31))
    trainer = build_trainer(config, args.mode, seed, sdn=sdn)
    os.makedirs(args.out, exist_ok=True)

    def progress(row):
        if args.verbose:
            print(row, flush=True)

    rows = train_agent(trainer, env, seed, callback=progress)
    tag = args.mode.replace("-", "_")
    _write_curve(os.path.join(args.out, "%s_curve.csv" % tag), rows,
                 config.config_hash())
    save_agent_checkpoint(trainer, args.mode, 0, seed, config, args.out)
    config.save(os.path.join(args.out, "config.json"))
    final = rows[-1]
    print("trained %s: success %.4f after %d epochs" % (
        args.mode, final["success_rate"], final["epoch"]))
    return 0


def cmd_evaluate(args):
    from .hrl.episodes import (run_discovered_episode, run_flat_episode,
                               run_subtask_episode)
    from .hrl.nets import QMlp
    from .subgoal.stream import TerminationStream

    config = _load_config(args)
    kb = load_kb(args.kb)
    env = DialogueEnv(kb, turn_cap=config.turn_cap)
    path = args.checkpoint
    with open(os.path.join(path, "agent.json")) as fh:
        spec = json.load(fh)

    class _Eval:
        def __init__(self):
            self.kind = spec["kind"]
            if self.kind == "rl":
                self.net = QMlp.load(os.path.join(path, "flat.npz"), "FLATQ")
            else:
                self.top = QMlp.load(os.path.join(path, "top.npz"), "TOPQ")
                self.low = QMlp.load(os.path.join(path, "low.npz"), "LOWQ")
            if self.kind == "discovered":
                sdn = SubgoalDiscoveryNetwork.load(
                    os.path.join(path, spec["sdn"]))
                self.stream = TerminationStream(
                    sdn.model_, threshold=float(spec.get("threshold", 0.2)))

        def greedy_episode(self, env, rng):
            if self.kind == "rl":
                return run_flat_episode(env, self.net, 0.0, rng)
            if self.kind == "subtask":
                return run_subtask_episode(env, self.top, self.low, 0.0, rng,
                                           config.gamma)
            return run_discovered_episode(env, self.top, self.low,
                                          self.stream, 0.0, rng, config.gamma)

    stats = evaluate_agent(_Eval(), env, args.episodes, args.seed,
                           workers=config.eval_workers)
    print(json.dumps({"agent": spec.get("agent"), "episodes": args.episodes,
                      **stats}, sort_keys=True))
    return 0


def cmd_report(args):
    config = _load_config(args)
    report = run_experiment(config, args.out, verbose=args.verbose)
    for agent in ("rule", "rl", "h-hrl", "m-hrl"):
        summary = report.summary(agent)
        if summary["runs"]:
            print("%-6s success %.4f +- %.4f" % (
                agent, summary["mean"]["success_rate"],
                summary["std"]["success_rate"]))
    print("artifacts in %s" % args.out)
    return 0


def cmd_serve(args):
    import uvicorn

    from .service.app import create_app
    from .service.runtime import load_pool, pool_kb

    pool_arg = args.pool or os.environ.get("SGF_POOL", "")
    paths = [p for p in pool_arg.split(os.pathsep) if p]
    if not paths:
        raise ValueError("no agent pool: pass --pool or set SGF_POOL")
    bind = args.bind or os.environ.get("SGF_BIND", "127.0.0.1:8080")
    host, _, port = bind.rpartition(":")
    factories = load_pool(paths)
    kb = load_kb(args.kb) if args.kb else pool_kb(paths)
    app = create_app(factories, kb, turn_cap=args.turn_cap,
                     log_path=args.log, seed=args.seed)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port),
                log_level="warning")
    return 0


def _add_config_flags(p, smoke=False):
    p.add_argument("--config", help="ExperimentConfig JSON file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config field (repeatable)")
    if smoke:
        p.add_argument("--smoke", action="store_true",
                       help="use the tiny smoke configuration")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sgrl",
        description="Subgoal discovery and hierarchical dialogue agents")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-kb", help="write a synthetic knowledge base")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--flights", type=int, default=200)
    p.add_argument("--hotels", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_kb)

    p = sub.add_parser("collect",
                       help="collect successful scripted dialogues")
    p.add_argument("--kb", required=True)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=101)
    p.add_argument("--turn-cap", type=int, default=60)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("train-sdn", help="fit the subgoal discovery model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verbose", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train_sdn)

    p = sub.add_parser("segment",
                       help="annotate dialogues with subgoal boundaries")
    p.add_argument("--sdn", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=float, default=0.2)
    p.add_argument("--limit", type=int)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("train-hrl", help="train one dialogue agent")
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--kb", required=True)
    p.add_argument("--sdn", help="subgoal checkpoint (m-hrl only)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--verbose", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train_hrl)

    p = sub.add_parser("evaluate", help="greedy evaluation of a checkpoint")
    p.add_argument("--checkpoint", required=True,
                   help="directory written by train-hrl or report")
    p.add_argument("--kb", required=True)
    p.add_argument("--episodes", type=int, default=500)
    p.add_argument("--seed", type=int, default=11)
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="full multi-run experiment")
    p.add_argument("--out", required=True)
    p.add_argument("--verbose", action="store_true")
    _add_config_flags(p, smoke=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the human-dialogue session service")
    p.add_argument("--pool", help="checkpoint directories, %r-separated"
                   % os.pathsep)
    p.add_argument("--bind", help="host:port (default from SGF_BIND)")
    p.add_argument("--kb", help="knowledge base (default from the pool)")
    p.add_argument("--turn-cap", type=int, default=60)
    p.add_argument("--log", help="append-only session log (JSON lines)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
