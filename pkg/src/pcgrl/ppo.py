"""Clipped-surrogate policy-gradient training over parallel environment copies.

Rollouts are collected from n_envs independently seeded environments stepped
in lockstep (single-threaded, so runs are bit-reproducible), advantages come
from generalized advantage estimation, and updates are minibatched Adam steps
on the clipped surrogate. Training emits one log row per update with the
episodic reward and goal rate over the last 100 finished episodes.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .env import EnvConfig, PcgrlEnv
from .nets import Adam, NetConfig, Params, forward, init_params, log_softmax, loss_and_grads
from .rng import child_seed, make_rng


class NonFiniteGradientError(RuntimeError):
    """An update produced NaN or infinite gradients; the run is aborted."""


@dataclass(frozen=True)
class TrainerConfig:
    total_steps: int = 200_000
    rollout_length: int = 256
    minibatch_size: int = 64
    epochs_per_update: int = 4
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    learning_rate: float = 2.5e-4
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    hidden_dim: int = 128
    seed: int = 0
    n_envs: int = 8

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if not 0.0 <= self.gae_lambda <= 1.0:
            raise ValueError(f"gae_lambda must be in [0, 1], got {self.gae_lambda}")
        if self.clip_eps <= 0.0:
            raise ValueError(f"clip_eps must be > 0, got {self.clip_eps}")
        for name in ("total_steps",):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("rollout_length", "minibatch_size", "epochs_per_update", "hidden_dim", "n_envs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass
class Trajectory:
    """Aligned per-step arrays of shape (T, ...) or (T, N, ...), plus a bootstrap value."""

    observations: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    values: np.ndarray
    rewards: np.ndarray
    dones: np.ndarray
    bootstrap_value: np.ndarray


def compute_gae(traj: Trajectory, gamma: float, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Advantages and returns via the standard recursion.

    delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
    A_t     = delta_t + gamma * lam * (1 - done_t) * A_{t+1}
    returns = A + V. done_t masks the bootstrap across episode boundaries.
    """
    rewards = np.asarray(traj.rewards, dtype=np.float64)
    values = np.asarray(traj.values, dtype=np.float64)
    dones = np.asarray(traj.dones, dtype=np.float64)
    horizon = rewards.shape[0]
    advantages = np.zeros_like(rewards)
    next_adv = np.zeros_like(np.asarray(traj.bootstrap_value, dtype=np.float64))
    next_value = np.asarray(traj.bootstrap_value, dtype=np.float64)
    for t in range(horizon - 1, -1, -1):
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        next_adv = delta + gamma * lam * nonterminal * next_adv
        advantages[t] = next_adv
        next_value = values[t]
    return advantages, advantages + values


def ppo_update(
    params: Params,
    batch: dict,
    config: TrainerConfig,
    optimizer: Adam,
    rng: np.random.Generator,
) -> tuple[Params, dict]:
    """One update: normalize advantages, then epochs of shuffled minibatch steps.

    Raises NonFiniteGradientError if any gradient goes NaN/inf.
    """
    n = len(batch["actions"])
    if n == 0:
        raise ValueError("empty update batch")
    adv = np.asarray(batch["advantages"], dtype=np.float64)
    adv = (adv - adv.mean()) / max(adv.std(), 1e-8)
    batch = dict(batch, advantages=adv)

    diag_sums: dict[str, float] = {}
    n_steps = 0
    for _ in range(config.epochs_per_update):
        order = rng.permutation(n)
        for start in range(0, n, config.minibatch_size):
            idx = order[start : start + config.minibatch_size]
            minibatch = {k: np.asarray(v)[idx] for k, v in batch.items()}
            _, grads, diag = loss_and_grads(
                params, minibatch, config.clip_eps, config.value_coef, config.entropy_coef
            )
            for g in grads.values():
                if not np.isfinite(g).all():
                    raise NonFiniteGradientError("non-finite gradient, update aborted")
            params = optimizer.step(params, grads)
            for k, v in diag.items():
                diag_sums[k] = diag_sums.get(k, 0.0) + v
            n_steps += 1
    diagnostics = {k: v / n_steps for k, v in diag_sums.items()}
    return params, diagnostics


@dataclass(frozen=True)
class LogRow:
    steps: int
    mean_reward: float
    success_rate: float
    entropy: float
    clip_frac: float


def write_training_log(path: str, rows: list[LogRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["steps", "mean_reward", "success_rate", "entropy", "clip_frac"])
        for row in rows:
            writer.writerow([row.steps, row.mean_reward, row.success_rate, row.entropy, row.clip_frac])


def _sample_actions(
    logits: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    logp = log_softmax(logits)
    cdf = np.cumsum(np.exp(logp), axis=1)
    u = rng.random((logits.shape[0], 1))
    actions = (cdf > u).argmax(axis=1)
    return actions, logp[np.arange(logits.shape[0]), actions]


def train(
    env_config: EnvConfig,
    trainer_config: TrainerConfig,
    params: Optional[Params] = None,
) -> tuple[Params, list[LogRow]]:
    """Run the rollout/update loop for about total_steps env steps.

    Updates consume n_envs * rollout_length steps each; a leftover smaller
    than one update's worth is not collected. total_steps=0 returns the
    initial parameters untouched.
    """
    envs = [
        PcgrlEnv(replace(env_config, seed=child_seed(env_config.seed, i)))
        for i in range(trainer_config.n_envs)
    ]
    n_envs = trainer_config.n_envs
    obs_dim = int(np.prod(envs[0].observation_shape))
    n_actions = envs[0].action_space_size

    init_rng = make_rng(child_seed(trainer_config.seed, 0))
    action_rng = make_rng(child_seed(trainer_config.seed, 1))
    update_rng = make_rng(child_seed(trainer_config.seed, 2))
    if params is None:
        params = init_params(NetConfig(obs_dim, trainer_config.hidden_dim, n_actions), init_rng)

    optimizer = Adam(params, trainer_config.learning_rate)
    steps_per_update = trainer_config.rollout_length * n_envs
    n_updates = trainer_config.total_steps // steps_per_update

    obs = np.stack([envs[i].reset().ravel() for i in range(n_envs)]).astype(np.float64)
    episode_returns = np.zeros(n_envs)
    recent_returns: deque[float] = deque(maxlen=100)
    recent_success: deque[float] = deque(maxlen=100)
    log_rows: list[LogRow] = []
    total_steps = 0

    horizon = trainer_config.rollout_length
    for _ in range(n_updates):
        obs_buf = np.empty((horizon, n_envs, obs_dim))
        act_buf = np.empty((horizon, n_envs), dtype=np.int64)
        logp_buf = np.empty((horizon, n_envs))
        val_buf = np.empty((horizon, n_envs))
        rew_buf = np.empty((horizon, n_envs))
        done_buf = np.empty((horizon, n_envs))

        for t in range(horizon):
            logits, values = forward(params, obs)
            actions, logps = _sample_actions(logits, action_rng)
            obs_buf[t] = obs
            act_buf[t] = actions
            logp_buf[t] = logps
            val_buf[t] = values
            for i, env in enumerate(envs):
                result = env.step(int(actions[i]))
                rew_buf[t, i] = result.reward
                done_buf[t, i] = float(result.done)
                episode_returns[i] += result.reward
                if result.done:
                    recent_returns.append(episode_returns[i])
                    recent_success.append(float(result.info["done_reason"] == "goal"))
                    episode_returns[i] = 0.0
                    obs[i] = env.reset().ravel()
                else:
                    obs[i] = result.observation.ravel()
            total_steps += n_envs

        _, bootstrap = forward(params, obs)
        traj = Trajectory(
            observations=obs_buf,
            actions=act_buf,
            log_probs=logp_buf,
            values=val_buf,
            rewards=rew_buf,
            dones=done_buf,
            bootstrap_value=bootstrap,
        )
        advantages, returns = compute_gae(traj, trainer_config.gamma, trainer_config.gae_lambda)
        batch = {
            "obs": obs_buf.reshape(horizon * n_envs, obs_dim),
            "actions": act_buf.reshape(-1),
            "logp_old": logp_buf.reshape(-1),
            "advantages": advantages.reshape(-1),
            "returns": returns.reshape(-1),
        }
        params, diag = ppo_update(params, batch, trainer_config, optimizer, update_rng)
        log_rows.append(
            LogRow(
                steps=total_steps,
                mean_reward=float(np.mean(recent_returns)) if recent_returns else 0.0,
                success_rate=float(np.mean(recent_success)) if recent_success else 0.0,
                entropy=diag["entropy"],
                clip_frac=diag["clip_frac"],
            )
        )
    return params, log_rows
