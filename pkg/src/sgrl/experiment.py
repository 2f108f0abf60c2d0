"""End-to-end experiment driver.

Stages: build the KB, collect successful dialogues with the scripted
policy, fit the subgoal model on them, then for each of `runs` seeds train
the flat and both hierarchical agents, evaluate everything greedily on a
shared per-run ladder, and aggregate a per-agent report. Every artifact
embeds the config hash; per-run metrics are journaled to metrics.jsonl as
they finish, so a failed stage still leaves the completed rows behind.
"""

import json
import multiprocessing
import os
import time

import numpy as np

from .agents.collect import collect_successes, roll_episode, save_dataset
from .agents.rule import RulePolicy
from .config import ExperimentConfig
from .dialog.featurizer import WIDTH
from .dialog.kb import generate_kb, save_kb
from .dialog.schema import SUBTASKS
from .hrl.training import (DiscoveredTrainer, FlatTrainer, SubtaskTrainer,
                           evaluate_greedy, train_agent)
from .sim.env import DialogueEnv
from .subgoal.estimator import SubgoalDiscoveryNetwork
from .subgoal.stream import TerminationStream

AGENTS = ("rule", "rl", "h-hrl", "m-hrl")
EVAL_TAG = 0xFA11         # final report ladder, distinct from curve probes
COLLECT_TAG = 0xDA7A
RUN_TAG = 0x5EED

CURVE_FIELDS = ("epoch", "epsilon", "success_rate", "avg_turns", "avg_reward")
METRIC_FIELDS = ("success_rate", "avg_turns", "avg_reward")


def derive_seed(master, tag, *extra):
    ss = np.random.SeedSequence([int(master), int(tag)] + [int(x) for x in extra])
    return int(ss.generate_state(1, np.uint32)[0])


def _rng(seed, tag, *extra):
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), int(tag)] + [int(x) for x in extra]))


class _RuleEval:
    """Adapter so the scripted policy runs through evaluate_greedy."""

    def greedy_episode(self, env, rng):
        policy = RulePolicy()
        policy.reset()
        return roll_episode(env, policy, rng, record=False)


# -- evaluation, optionally forked across workers ---------------------------

_EVAL_CTX = {}


def _eval_block(indices):
    trainer, env, seed, tag = _EVAL_CTX["job"]
    succ = turns = reward = 0.0
    for i in indices:
        stats = trainer.greedy_episode(env, _rng(seed, tag, i))
        succ += float(stats.success)
        turns += stats.turns
        reward += stats.reward
    return succ, turns, reward


def evaluate_agent(trainer, env, n_episodes, seed, tag=EVAL_TAG, workers=1):
    """Greedy ladder evaluation; forked workers split the episode range.

    Per-episode rngs depend only on (seed, tag, index) and the per-episode
    sums are integer-valued, so the result is identical for any worker
    count.
    """
    if workers <= 1 or n_episodes < 2 * workers:
        return evaluate_greedy(trainer, env, n_episodes, seed, tag=tag)
    blocks = [b.tolist() for b in
              np.array_split(np.arange(n_episodes), workers)]
    _EVAL_CTX["job"] = (trainer, env, seed, tag)
    try:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            parts = pool.map(_eval_block, blocks)
    finally:
        _EVAL_CTX.pop("job", None)
    succ = sum(p[0] for p in parts)
    turns = sum(p[1] for p in parts)
    reward = sum(p[2] for p in parts)
    n = float(n_episodes)
    return {"success_rate": succ / n, "avg_turns": turns / n,
            "avg_reward": reward / n}


# -- artifacts --------------------------------------------------------------

def _write_curve(path, rows, config_hash):
    with open(path, "w") as fh:
        fh.write("# config %s\n" % config_hash)
        fh.write(",".join(CURVE_FIELDS) + "\n")
        for row in rows:
            eps = "" if row["epsilon"] is None else "%.4f" % row["epsilon"]
            fh.write("%d,%s,%.6f,%.6f,%.6f\n" % (
                row["epoch"], eps, row["success_rate"], row["avg_turns"],
                row["avg_reward"]))


def build_trainer(config, agent, seed, sdn=None):
    settings = config.train_settings()
    if agent == "rl":
        return FlatTrainer(WIDTH, settings, seed)
    if agent == "h-hrl":
        bonus = 2.0 * config.turn_cap / len(SUBTASKS)
        return SubtaskTrainer(WIDTH, settings, seed, bonus=bonus)
    if agent == "m-hrl":
        if sdn is None:
            raise ValueError("m-hrl needs a fitted subgoal model")
        stream = TerminationStream(sdn.model_, threshold=config.threshold)
        bonus = 2.0 * config.turn_cap / config.latent_slots
        return DiscoveredTrainer(WIDTH, settings, seed, stream, bonus=bonus)
    raise ValueError("unknown agent %r" % agent)


def save_agent_checkpoint(trainer, agent, run, seed, config, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    h = config.config_hash()
    meta = {"config": h, "agent": agent, "run": run, "seed": seed}
    if trainer.kind == "rl":
        paths = {"flat": os.path.join(out_dir, "flat.npz")}
    else:
        paths = {"top": os.path.join(out_dir, "top.npz"),
                 "low": os.path.join(out_dir, "low.npz")}
    trainer.save(paths, metadata=meta)
    spec = {"agent": agent, "kind": trainer.kind, "run": run, "seed": seed,
            "config": h, "kb": "../../kb.json"}
    if agent == "m-hrl":
        spec["sdn"] = "../../sdn.npz"
        spec["threshold"] = config.threshold
    with open(os.path.join(out_dir, "agent.json"), "w") as fh:
        json.dump(spec, fh, sort_keys=True, indent=1)
        fh.write("\n")


class MetricsReport:
    """Per-agent evaluation rows plus their means and deviations."""

    def __init__(self, config_hash):
        self.config_hash = config_hash
        self.rows = []               # dicts: agent, run, metrics

    def add(self, agent, run, stats):
        row = {"agent": agent, "run": run}
        row.update({k: stats[k] for k in METRIC_FIELDS})
        self.rows.append(row)

    def agent_rows(self, agent):
        return [r for r in self.rows if r["agent"] == agent]

    def summary(self, agent):
        rows = self.agent_rows(agent)
        out = {"runs": len(rows), "mean": {}, "std": {}}
        for k in METRIC_FIELDS:
            vals = np.array([r[k] for r in rows], dtype=np.float64)
            out["mean"][k] = float(vals.mean()) if len(vals) else float("nan")
            out["std"][k] = float(vals.std()) if len(vals) else float("nan")
        return out

    def to_json(self):
        agents = sorted({r["agent"] for r in self.rows},
                        key=lambda a: AGENTS.index(a) if a in AGENTS else 99)
        return {"config": self.config_hash,
                "agents": {a: {"rows": self.agent_rows(a),
                               "summary": self.summary(a)} for a in agents}}

    def save_csv(self, path):
        agents = sorted({r["agent"] for r in self.rows},
                        key=lambda a: AGENTS.index(a) if a in AGENTS else 99)
        with open(path, "w") as fh:
            fh.write("# config %s\n" % self.config_hash)
            fh.write("agent,run," + ",".join(METRIC_FIELDS) + "\n")
            for agent in agents:
                for row in self.agent_rows(agent):
                    fh.write("%s,%s,%s\n" % (agent, row["run"], ",".join(
                        "%.6f" % row[k] for k in METRIC_FIELDS)))
                s = self.summary(agent)
                for stat in ("mean", "std"):
                    fh.write("%s,%s,%s\n" % (agent, stat, ",".join(
                        "%.6f" % s[stat][k] for k in METRIC_FIELDS)))

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, sort_keys=True, indent=1)
            fh.write("\n")


# -- the driver -------------------------------------------------------------

def _log(verbose, msg):
    if verbose:
        print(msg, flush=True)


_RUN_CTX = {}


def _train_eval_run(run):
    """Train and evaluate every agent for one run index.

    Reads its inputs from _RUN_CTX (inherited over fork, or set directly
    in the serial path). Curves and checkpoints go to per-run paths, so
    concurrent runs never touch the same file; everything downstream of
    the run seed is deterministic, so the artifacts and returned stats do
    not depend on which worker picks the run up.
    """
    config, env, sdn, out_dir, eval_workers = _RUN_CTX["job"]
    h = config.config_hash()
    run_seed = derive_seed(config.master_seed, RUN_TAG, run) % (2 ** 31)
    out = []
    for agent in AGENTS:
        if agent == "rule":
            stats = evaluate_agent(_RuleEval(), env, config.eval_episodes,
                                   run_seed, workers=eval_workers)
        else:
            trainer = build_trainer(config, agent, run_seed, sdn=sdn)
            rows = train_agent(trainer, env, run_seed)
            tag = agent.replace("-", "_")
            _write_curve(os.path.join(
                out_dir, "curves", "%s_run%d.csv" % (tag, run)), rows, h)
            save_agent_checkpoint(
                trainer, agent, run, run_seed, config,
                os.path.join(out_dir, "checkpoints", "%s_run%d" % (tag, run)))
            stats = evaluate_agent(trainer, env, config.eval_episodes,
                                   run_seed, workers=eval_workers)
        out.append((agent, stats))
    return out


def run_experiment(config, out_dir, verbose=False):
    """Run every stage under out_dir and return the final MetricsReport.

    Stages write their artifacts as they complete, and per-run metrics are
    appended to metrics.jsonl as each run finishes, so a failure part-way
    preserves everything finished before it. Runs are independent given
    the shared KB and subgoal model, so they fork across run_workers; the
    journal and report are written by the parent in run order, making the
    whole output tree byte-identical for any worker count.
    """
    config.validate()
    h = config.config_hash()
    os.makedirs(out_dir, exist_ok=True)
    curves_dir = os.path.join(out_dir, "curves")
    ckpt_dir = os.path.join(out_dir, "checkpoints")
    os.makedirs(curves_dir, exist_ok=True)
    os.makedirs(ckpt_dir, exist_ok=True)
    config.save(os.path.join(out_dir, "config.json"))
    t0 = time.time()

    kb = generate_kb(config.kb_seed, n_flights=config.n_flights,
                     n_hotels=config.n_hotels)
    save_kb(kb, os.path.join(out_dir, "kb.json"), meta={"config": h})
    env = DialogueEnv(kb, turn_cap=config.turn_cap)
    _log(verbose, "kb ready (%d flights, %d hotels)" % (
        config.n_flights, config.n_hotels))

    episodes, attempts = collect_successes(
        env, RulePolicy(), config.n_dialogues,
        master_seed=derive_seed(config.master_seed, COLLECT_TAG))
    save_dataset(episodes, os.path.join(out_dir, "dialogues.jsonl"),
                 meta={"config": h})
    _log(verbose, "collected %d successes in %d episodes (%.0fs)" % (
        len(episodes), attempts, time.time() - t0))

    trajs = [np.asarray(ep.states, dtype=np.float64) for ep in episodes]
    n_train = int(len(trajs) * config.train_frac)
    sdn = SubgoalDiscoveryNetwork(
        latent_slots=config.latent_slots, hidden_size=config.sdn_hidden,
        max_segments=config.max_segments, learning_rate=config.sdn_lr,
        batch_size=config.sdn_batch, max_steps=config.sdn_steps,
        anneal_temp=config.anneal_temp, anneal_frac=config.anneal_frac,
        seed=derive_seed(config.master_seed, 0x5D4) % (2 ** 31),
        verbose=verbose)
    sdn.fit(trajs[:n_train], validation=trajs[n_train:])
    sdn.save(os.path.join(out_dir, "sdn.npz"), extra_meta={"config": h})
    _log(verbose, "subgoal model fitted (%.0fs)" % (time.time() - t0))

    workers = max(1, min(config.run_workers, os.cpu_count() or 1,
                         config.runs))
    # pool workers are daemonic and cannot fork again
    eval_workers = config.eval_workers if workers == 1 else 1
    _RUN_CTX["job"] = (config, env, sdn, out_dir, eval_workers)
    report = MetricsReport(h)
    journal_path = os.path.join(out_dir, "metrics.jsonl")
    journal = open(journal_path, "w")
    pool = None
    try:
        if workers == 1:
            results = map(_train_eval_run, range(config.runs))
        else:
            ctx = multiprocessing.get_context("fork")
            pool = ctx.Pool(workers)
            results = pool.imap(_train_eval_run, range(config.runs))
        for run, rows in enumerate(results):
            for agent, stats in rows:
                report.add(agent, run, stats)
                journal.write(json.dumps(
                    {"agent": agent, "run": run, "config": h,
                     **{k: stats[k] for k in METRIC_FIELDS}},
                    sort_keys=True) + "\n")
                journal.flush()
                _log(verbose, "run %d %s: %.4f success, %.1f turns (%.0fs)" % (
                    run, agent, stats["success_rate"], stats["avg_turns"],
                    time.time() - t0))
        if pool is not None:
            pool.close()
            pool.join()
    finally:
        if pool is not None:
            pool.terminate()
        journal.close()
        _RUN_CTX.pop("job", None)

    report.save_csv(os.path.join(out_dir, "report.csv"))
    report.save_json(os.path.join(out_dir, "report.json"))
    _log(verbose, "report written (%.0fs)" % (time.time() - t0))
    return report
