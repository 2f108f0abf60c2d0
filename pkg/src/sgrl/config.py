"""Experiment configuration: one validated record drives every stage.

The config is persisted verbatim next to every artifact it produces, and a
short hash of its canonical JSON form is embedded in reports, curves,
checkpoints and logs so any output can be traced back to the exact
settings that made it.
"""

import dataclasses
import hashlib
import json

from .hrl.training import TrainSettings


@dataclasses.dataclass
class ExperimentConfig:
    # environment
    turn_cap: int = 60
    kb_seed: int = 7
    n_flights: int = 200
    n_hotels: int = 100
    # dataset of successful dialogues for subgoal discovery
    n_dialogues: int = 1634
    train_frac: float = 0.8
    # subgoal discovery model
    latent_slots: int = 4
    max_segments: int = 4
    sdn_hidden: int = 16
    sdn_steps: int = 2500
    sdn_batch: int = 8
    sdn_lr: float = 1e-3
    anneal_temp: float = 8.0
    anneal_frac: float = 0.5
    threshold: float = 0.2
    # Q-learning
    runs: int = 5
    epochs: int = 300
    episodes_per_epoch: int = 100
    warm_episodes: int = 200
    q_hidden: int = 80
    batch_size: int = 16
    gamma: float = 0.95
    learning_rate: float = 1e-3
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_anneal_epochs: int = 100
    margin_weight: float = 1.0
    margin_weight_end: float = 0.1
    margin_anneal_epochs: int = 200
    # evaluation
    curve_episodes: int = 100      # greedy probe after every epoch
    eval_episodes: int = 500       # final per-run ladder for the report
    eval_workers: int = 1
    # plumbing
    run_workers: int = 4           # capped by cpu count and by `runs`
    master_seed: int = 11

    def validate(self):
        problems = []

        def check(cond, msg):
            if not cond:
                problems.append(msg)

        check(self.turn_cap >= 10, "turn_cap must be >= 10")
        check(self.n_flights >= 1 and self.n_hotels >= 1,
              "KB sizes must be positive")
        check(self.n_dialogues >= 10, "n_dialogues must be >= 10")
        check(0.0 < self.train_frac < 1.0, "train_frac must be in (0, 1)")
        check(self.latent_slots >= 2, "latent_slots must be >= 2")
        check(self.max_segments >= 1, "max_segments must be >= 1")
        check(self.sdn_hidden >= 2, "sdn_hidden must be >= 2")
        check(self.sdn_steps >= 1, "sdn_steps must be >= 1")
        check(self.sdn_batch >= 1, "sdn_batch must be >= 1")
        check(self.sdn_lr > 0.0, "sdn_lr must be positive")
        check(self.anneal_temp >= 1.0, "anneal_temp must be >= 1")
        check(0.0 < self.anneal_frac <= 1.0, "anneal_frac must be in (0, 1]")
        check(0.0 < self.threshold <= 1.0, "threshold must be in (0, 1]")
        check(self.runs >= 1, "runs must be >= 1")
        check(self.epochs >= 1, "epochs must be >= 1")
        check(self.episodes_per_epoch >= 1, "episodes_per_epoch must be >= 1")
        check(self.warm_episodes >= 1, "warm_episodes must be >= 1")
        check(self.q_hidden >= 2, "q_hidden must be >= 2")
        check(self.batch_size >= 1, "batch_size must be >= 1")
        check(0.0 < self.gamma <= 1.0, "gamma must be in (0, 1]")
        check(self.learning_rate > 0.0, "learning_rate must be positive")
        check(0.0 <= self.eps_end <= self.eps_start <= 1.0,
              "need 0 <= eps_end <= eps_start <= 1")
        check(self.eps_anneal_epochs >= 0, "eps_anneal_epochs must be >= 0")
        check(self.margin_weight >= 0.0, "margin_weight must be >= 0")
        check(self.margin_weight_end >= 0.0, "margin_weight_end must be >= 0")
        check(self.margin_anneal_epochs >= 0,
              "margin_anneal_epochs must be >= 0")
        check(self.curve_episodes >= 1, "curve_episodes must be >= 1")
        check(self.eval_episodes >= 1, "eval_episodes must be >= 1")
        check(self.eval_workers >= 1, "eval_workers must be >= 1")
        check(self.run_workers >= 1, "run_workers must be >= 1")
        check(self.master_seed >= 0, "master_seed must be >= 0")
        if problems:
            raise ValueError("invalid config: " + "; ".join(problems))
        return self

    # -- persistence ------------------------------------------------------

    def to_json(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, obj):
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(obj) - fields)
        if unknown:
            raise ValueError("unknown config keys: %s" % ", ".join(unknown))
        return cls(**obj).validate()

    def with_overrides(self, overrides):
        merged = self.to_json()
        merged.update(overrides)
        return self.from_json(merged)

    def config_hash(self):
        # worker counts shape wall time, not results, so they stay out of
        # the hash: reruns at a different parallelism tag identically
        obj = {k: v for k, v in self.to_json().items()
               if k not in ("eval_workers", "run_workers")}
        canon = json.dumps(obj, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    def save(self, path):
        with open(path, "w") as fh:
            json.dump({"config": self.to_json(),
                       "hash": self.config_hash()}, fh,
                      sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            obj = json.load(fh)
        return cls.from_json(obj.get("config", obj))

    # -- derived settings -------------------------------------------------

    def train_settings(self):
        return TrainSettings(
            epochs=self.epochs,
            episodes_per_epoch=self.episodes_per_epoch,
            warm_episodes=self.warm_episodes,
            q_hidden=self.q_hidden,
            batch_size=self.batch_size,
            gamma=self.gamma,
            learning_rate=self.learning_rate,
            eps_start=self.eps_start,
            eps_end=self.eps_end,
            eps_anneal_epochs=self.eps_anneal_epochs,
            eval_episodes=self.curve_episodes,
            margin_weight=self.margin_weight,
            margin_weight_end=self.margin_weight_end,
            margin_anneal_epochs=self.margin_anneal_epochs,
        )

    @classmethod
    def smoke(cls):
        """Tiny end-to-end run: every stage exercised, minutes not hours."""
        return cls(n_dialogues=80, sdn_hidden=16, sdn_steps=200,
                   runs=1, epochs=2, episodes_per_epoch=30,
                   warm_episodes=50, eps_anneal_epochs=2,
                   margin_anneal_epochs=0,
                   curve_episodes=30, eval_episodes=100)
