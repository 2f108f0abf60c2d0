"""Epoch-driven Q-learning for the three dialogue agents.

One epoch: collect episodes with epsilon-greedy exploration into replay
buffers, snapshot the nets, then make one insertion-order pass over each
buffer computing one-step targets against the snapshot and regressing the
selected Q values. Epsilon anneals linearly across epochs.

Stability measures, all needed because bootstrapped value fitting on
near-duplicate dialogue states is prone to runaway:
  * rewards enter the buffers scaled by reward_scale, so episode returns
    land in roughly [-2, 2];
  * targets are clipped to +-value_clip, the feasible return range, which
    caps the self-amplification loop;
  * demonstrations live in separate buffers, and their updates add a
    large-margin term pushing the demonstrated action's value above every
    other action by `margin`. Without it, actions the data never tries
    keep their initialization values, the argmax chases that noise, and
    greedy rollouts never reach the success the demonstrations contain.

The demonstration pool starts as scripted-policy rollouts and, with
demo_refresh on, is topped up with the agent's own successful episodes;
once the buffer is full the scripted demos evict first, so the anchor
tracks the best behavior seen so far instead of pinning the policy to the
script forever. The margin weight can anneal across epochs for the same
reason: strong imitation early, mostly value-driven late.
"""

from dataclasses import dataclass, replace

import numpy as np

from ..agents.rule import RulePolicy
from ..dialog.schema import NUM_ACTIONS, SUBTASKS
from ..kernel import ops
from ..kernel.optim import RmsProp
from ..kernel.tensor import Tape, Tensor
from .episodes import (run_discovered_episode, run_flat_episode,
                       run_subtask_episode)
from .nets import QMlp, goal_input
from .replay import OptionTuple, ReplayBuffer, StepTuple
from .targets import option_target, step_target

FLIGHT_GOAL = 0          # warm-start goal ids follow SUBTASKS order


@dataclass
class TrainSettings:
    epochs: int = 60
    episodes_per_epoch: int = 100
    warm_episodes: int = 100
    q_hidden: int = 80
    batch_size: int = 16
    gamma: float = 0.95
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    max_grad_norm: float = 5.0
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_anneal_epochs: int = 50
    eval_episodes: int = 50
    buffer_capacity: int = 10000
    reward_scale: float = 1.0 / 60.0
    value_clip: float = 2.05
    margin: float = 0.1
    margin_weight: float = 1.0
    margin_weight_end: float = 0.25
    margin_anneal_epochs: int = 0    # 0 keeps the weight constant
    demo_refresh: bool = True


def epsilon_at(epoch, settings):
    s = settings
    if s.eps_anneal_epochs <= 0 or epoch >= s.eps_anneal_epochs:
        return s.eps_end
    frac = epoch / s.eps_anneal_epochs
    return s.eps_start + frac * (s.eps_end - s.eps_start)


def margin_weight_at(epoch, settings):
    s = settings
    if s.margin_anneal_epochs <= 0:
        return s.margin_weight
    if epoch >= s.margin_anneal_epochs:
        return s.margin_weight_end
    frac = epoch / s.margin_anneal_epochs
    return s.margin_weight + frac * (s.margin_weight_end - s.margin_weight)


def _sub_rng(seed, tag, *extra):
    return np.random.default_rng(np.random.SeedSequence([seed, tag, *extra]))


class ScaledBuffer(ReplayBuffer):
    """Replay buffer that rescales rewards / returns as tuples arrive."""

    def __init__(self, capacity, scale):
        super().__init__(capacity)
        self.scale = scale

    def add(self, item):
        if isinstance(item, StepTuple):
            item = replace(item, reward=item.reward * self.scale)
        elif isinstance(item, OptionTuple):
            item = replace(item, ret=item.ret * self.scale)
        super().add(item)


class _Stage:
    """Per-episode holding pen so tuples can be routed after the outcome."""

    def __init__(self):
        self.items = []

    def add(self, item):
        self.items.append(item)


def q_loss(net, xs, actions, targets, weight_decay,
           margin=0.0, margin_weight=0.0):
    """Selected-action squared error as a graph node.

    With margin > 0 the batch is treated as demonstrations: the loss adds
    max_a(Q(s,a) + margin * [a != a_demo]) - Q(s, a_demo), which is zero
    exactly when the demonstrated action leads by the margin.
    """
    xs = np.asarray(xs, dtype=np.float64)
    actions = np.asarray(actions, dtype=int)
    q = net.forward(Tensor(xs))
    picked = ops.take_per_row(q, actions)
    err = ops.sub(picked, Tensor(np.asarray(targets, dtype=np.float64)))
    loss = ops.tmean(ops.square(err))
    if margin > 0.0 and margin_weight > 0.0:
        bump = np.full(q.shape, margin)
        bump[np.arange(len(actions)), actions] = 0.0
        viol = np.argmax(q.data + bump, axis=1)
        gap = ops.sub(ops.take_per_row(q, viol), picked)
        offs = Tensor(bump[np.arange(len(viol)), viol])
        loss = ops.add(loss, ops.scale(ops.tmean(ops.add(gap, offs)),
                                       margin_weight))
    if weight_decay > 0.0:
        penalty = ops.add(ops.tsum(ops.square(net.w1)),
                          ops.tsum(ops.square(net.w2)))
        loss = ops.add(loss, ops.scale(penalty, weight_decay))
    return loss


def q_update(net, opt, xs, actions, targets, weight_decay,
             margin=0.0, margin_weight=0.0):
    """One RMSProp step on q_loss over the batch."""
    with Tape() as tape:
        loss = q_loss(net, xs, actions, targets, weight_decay,
                      margin=margin, margin_weight=margin_weight)
        grads = tape.backward(loss, net.param_list())
    opt.step(grads)
    return float(loss.data)


def _clip(v, limit):
    return min(max(v, -limit), limit)


def _pass_steps(net, opt, buffer, frozen, settings, input_fn=None,
                demo=False, margin_weight=None):
    if margin_weight is None:
        margin_weight = settings.margin_weight
    for batch in buffer.batches(settings.batch_size):
        xs = [t.state if input_fn is None else input_fn(t.state, t.goal)
              for t in batch]
        acts = [t.action for t in batch]
        targets = [_clip(step_target(net, frozen, t, settings.gamma, input_fn),
                         settings.value_clip)
                   for t in batch]
        q_update(net, opt, xs, acts, targets, settings.weight_decay,
                 margin=settings.margin if demo else 0.0,
                 margin_weight=margin_weight)


def _pass_options(net, opt, buffer, frozen, settings, demo=False,
                  margin_weight=None):
    if margin_weight is None:
        margin_weight = settings.margin_weight
    for batch in buffer.batches(settings.batch_size):
        xs = [t.state for t in batch]
        goals = [t.goal for t in batch]
        targets = [_clip(option_target(net, frozen, t, settings.gamma),
                         settings.value_clip)
                   for t in batch]
        q_update(net, opt, xs, goals, targets, settings.weight_decay,
                 margin=settings.margin if demo else 0.0,
                 margin_weight=margin_weight)


class FlatTrainer:
    """Primitive-action Q-learning, no hierarchy."""

    kind = "rl"

    def __init__(self, state_dim, settings, seed):
        self.settings = settings
        self.seed = seed
        self.net = QMlp(state_dim, NUM_ACTIONS, hidden=settings.q_hidden,
                        seed=seed, name="flat")
        self.opt = RmsProp(self.net.param_list(), lr=settings.learning_rate,
                           clip_norm=settings.max_grad_norm)
        s = settings
        self.steps = ScaledBuffer(s.buffer_capacity, s.reward_scale)
        self.demo_steps = ScaledBuffer(s.buffer_capacity, s.reward_scale)

    def warm_start(self, env, rng):
        rule = RulePolicy()
        for _ in range(self.settings.warm_episodes):
            rule.reset()
            run_flat_episode(env, self.net, 0.0, rng, buffer=self.demo_steps,
                             choose_action=rule.select)

    def episode(self, env, eps, rng):
        stage = _Stage()
        stats = run_flat_episode(env, self.net, eps, rng, buffer=stage)
        keep = self.settings.demo_refresh and stats.success
        for t in stage.items:
            self.steps.add(t)
            if keep:
                self.demo_steps.add(t)
        return stats

    def update(self, margin_weight=None):
        frozen = self.net.clone_arrays()
        _pass_steps(self.net, self.opt, self.steps, frozen, self.settings)
        _pass_steps(self.net, self.opt, self.demo_steps, frozen,
                    self.settings, demo=True, margin_weight=margin_weight)

    def greedy_episode(self, env, rng):
        return run_flat_episode(env, self.net, 0.0, rng)

    def save(self, paths, metadata=None):
        self.net.save(paths["flat"], "FLATQ", metadata=metadata)


class SubtaskTrainer:
    """Two-level agent over the fixed flight / hotel subtasks."""

    kind = "subtask"

    def __init__(self, state_dim, settings, seed, bonus=60.0):
        self.settings = settings
        self.seed = seed
        self.bonus = bonus
        n = len(SUBTASKS)
        self.top = QMlp(state_dim, n, hidden=settings.q_hidden, seed=seed,
                        name="top")
        self.low = QMlp(state_dim + n, NUM_ACTIONS, hidden=settings.q_hidden,
                        seed=seed + 1, name="low")
        self.top_opt = RmsProp(self.top.param_list(), lr=settings.learning_rate,
                               clip_norm=settings.max_grad_norm)
        self.low_opt = RmsProp(self.low.param_list(), lr=settings.learning_rate,
                               clip_norm=settings.max_grad_norm)
        s = settings
        self.options = ScaledBuffer(s.buffer_capacity, s.reward_scale)
        self.steps = ScaledBuffer(s.buffer_capacity, s.reward_scale)
        self.demo_options = ScaledBuffer(s.buffer_capacity, s.reward_scale)
        self.demo_steps = ScaledBuffer(s.buffer_capacity, s.reward_scale)

    def _run(self, env, eps, rng, buffers=None, choose_action=None,
             choose_goal=None):
        option_buffer, step_buffer = buffers if buffers else (None, None)
        return run_subtask_episode(
            env, self.top, self.low, eps, rng, self.settings.gamma,
            option_buffer=option_buffer, step_buffer=step_buffer,
            bonus=self.bonus, choose_action=choose_action,
            choose_goal=choose_goal)

    def warm_start(self, env, rng):
        rule = RulePolicy()

        def first_open_subtask(state, vec):
            for i, name in enumerate(SUBTASKS):
                if name not in state.booked:
                    return i
            return FLIGHT_GOAL

        for _ in range(self.settings.warm_episodes):
            rule.reset()
            self._run(env, 0.0, rng,
                      buffers=(self.demo_options, self.demo_steps),
                      choose_action=rule.select,
                      choose_goal=first_open_subtask)

    def episode(self, env, eps, rng):
        opt_stage, step_stage = _Stage(), _Stage()
        stats = self._run(env, eps, rng, buffers=(opt_stage, step_stage))
        keep = self.settings.demo_refresh and stats.success
        for t in opt_stage.items:
            self.options.add(t)
            if keep:
                self.demo_options.add(t)
        for t in step_stage.items:
            self.steps.add(t)
            if keep:
                self.demo_steps.add(t)
        return stats

    def update(self, margin_weight=None):
        top_frozen = self.top.clone_arrays()
        low_frozen = self.low.clone_arrays()
        n = len(SUBTASKS)
        in_fn = lambda s, g: goal_input(s, g, n)
        _pass_options(self.top, self.top_opt, self.options, top_frozen,
                      self.settings)
        _pass_options(self.top, self.top_opt, self.demo_options, top_frozen,
                      self.settings, demo=True, margin_weight=margin_weight)
        _pass_steps(self.low, self.low_opt, self.steps, low_frozen,
                    self.settings, input_fn=in_fn)
        _pass_steps(self.low, self.low_opt, self.demo_steps, low_frozen,
                    self.settings, input_fn=in_fn, demo=True,
                    margin_weight=margin_weight)

    def greedy_episode(self, env, rng):
        return self._run(env, 0.0, rng)

    def save(self, paths, metadata=None):
        self.top.save(paths["top"], "TOPQ", metadata=metadata)
        self.low.save(paths["low"], "LOWQ", metadata=metadata)


class DiscoveredTrainer:
    """Two-level agent whose options terminate on the learned stream."""

    kind = "discovered"

    def __init__(self, state_dim, settings, seed, stream, bonus=30.0):
        self.settings = settings
        self.seed = seed
        self.stream = stream
        self.bonus = bonus
        self.n_goals = stream.model.latent_slots
        self.top = QMlp(state_dim, self.n_goals, hidden=settings.q_hidden,
                        seed=seed, name="top")
        self.low = QMlp(state_dim + self.n_goals, NUM_ACTIONS,
                        hidden=settings.q_hidden, seed=seed + 1, name="low")
        self.top_opt = RmsProp(self.top.param_list(), lr=settings.learning_rate,
                               clip_norm=settings.max_grad_norm)
        self.low_opt = RmsProp(self.low.param_list(), lr=settings.learning_rate,
                               clip_norm=settings.max_grad_norm)
        s = settings
        self.options = ScaledBuffer(s.buffer_capacity, s.reward_scale)
        self.steps = ScaledBuffer(s.buffer_capacity, s.reward_scale)
        self.demo_options = ScaledBuffer(s.buffer_capacity, s.reward_scale)
        self.demo_steps = ScaledBuffer(s.buffer_capacity, s.reward_scale)

    def _run(self, env, eps, rng, buffers=None, choose_action=None,
             choose_goal=None):
        option_buffer, step_buffer = buffers if buffers else (None, None)
        return run_discovered_episode(
            env, self.top, self.low, self.stream, eps, rng,
            self.settings.gamma,
            option_buffer=option_buffer, step_buffer=step_buffer,
            bonus=self.bonus, n_goals=self.n_goals,
            choose_action=choose_action, choose_goal=choose_goal)

    def warm_start(self, env, rng):
        rule = RulePolicy()

        def current_symbol(state, vec):
            # label the option with the segment's latent at its start
            return self.stream.latent_label()

        for _ in range(self.settings.warm_episodes):
            rule.reset()
            self._run(env, 0.0, rng,
                      buffers=(self.demo_options, self.demo_steps),
                      choose_action=rule.select,
                      choose_goal=current_symbol)

    def episode(self, env, eps, rng):
        opt_stage, step_stage = _Stage(), _Stage()
        stats = self._run(env, eps, rng, buffers=(opt_stage, step_stage))
        keep = self.settings.demo_refresh and stats.success
        for t in opt_stage.items:
            self.options.add(t)
            if keep:
                self.demo_options.add(t)
        for t in step_stage.items:
            self.steps.add(t)
            if keep:
                self.demo_steps.add(t)
        return stats

    def update(self, margin_weight=None):
        top_frozen = self.top.clone_arrays()
        low_frozen = self.low.clone_arrays()
        n = self.n_goals
        in_fn = lambda s, g: goal_input(s, g, n)
        _pass_options(self.top, self.top_opt, self.options, top_frozen,
                      self.settings)
        _pass_options(self.top, self.top_opt, self.demo_options, top_frozen,
                      self.settings, demo=True, margin_weight=margin_weight)
        _pass_steps(self.low, self.low_opt, self.steps, low_frozen,
                    self.settings, input_fn=in_fn)
        _pass_steps(self.low, self.low_opt, self.demo_steps, low_frozen,
                    self.settings, input_fn=in_fn, demo=True,
                    margin_weight=margin_weight)

    def greedy_episode(self, env, rng):
        return self._run(env, 0.0, rng)

    def save(self, paths, metadata=None):
        self.top.save(paths["top"], "TOPQ", metadata=metadata)
        self.low.save(paths["low"], "LOWQ", metadata=metadata)


def evaluate_greedy(trainer, env, n_episodes, seed, tag=0xE7A1):
    """Greedy rollouts on a fixed seed ladder; returns summary stats."""
    succ = turns = reward = 0.0
    for i in range(n_episodes):
        stats = trainer.greedy_episode(env, _sub_rng(seed, tag, i))
        succ += float(stats.success)
        turns += stats.turns
        reward += stats.reward
    n = float(n_episodes)
    return {"success_rate": succ / n, "avg_turns": turns / n,
            "avg_reward": reward / n}


def train_agent(trainer, env, seed, settings=None, callback=None):
    """Epoch-0 eval, warm start, then the epoch loop. Returns curve rows.

    Row keys: epoch, epsilon, success_rate, avg_turns, avg_reward. The
    epoch-0 row is evaluated before the warm start touches the nets, so it
    is the untrained greedy baseline and later rows show everything the
    demonstrations plus exploration add on top of it.
    """
    settings = settings or trainer.settings
    rows = []
    row = {"epoch": 0, "epsilon": None}
    row.update(evaluate_greedy(trainer, env, settings.eval_episodes, seed))
    rows.append(row)
    if callback is not None:
        callback(row)
    trainer.warm_start(env, _sub_rng(seed, 0x3A12))
    trainer.update(margin_weight=margin_weight_at(0, settings))
    for epoch in range(1, settings.epochs + 1):
        eps = epsilon_at(epoch - 1, settings)
        rng = _sub_rng(seed, 0xC011, epoch)
        for _ in range(settings.episodes_per_epoch):
            trainer.episode(env, eps, rng)
        trainer.update(margin_weight=margin_weight_at(epoch - 1, settings))
        stats = evaluate_greedy(trainer, env, settings.eval_episodes, seed)
        row = {"epoch": epoch, "epsilon": round(eps, 4)}
        row.update(stats)
        rows.append(row)
        if callback is not None:
            callback(row)
    return rows
