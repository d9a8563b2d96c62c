"""Small feed-forward actor-critic with hand-written gradients.

Two shared ReLU trunk layers over the flattened one-hot observation, a logits
head and a scalar value head. Forward and backward passes are explicit numpy
so the full surrogate-loss gradient can be checked against finite differences
parameter by parameter; everything runs in float64.

The actor head starts at exactly zero, which makes the initial policy
uniform over actions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

Params = dict[str, np.ndarray]

PARAM_LAYERS = (("w0", "b0"), ("w1", "b1"), ("wa", "ba"), ("wv", "bv"))


@dataclass(frozen=True)
class NetConfig:
    in_dim: int
    hidden_dim: int
    n_actions: int


def _orthogonal(rng: np.random.Generator, rows: int, cols: int, scale: float) -> np.ndarray:
    a = rng.standard_normal((rows, cols) if rows >= cols else (cols, rows))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return scale * q[:rows, :cols]


def init_params(cfg: NetConfig, rng: np.random.Generator) -> Params:
    return {
        "w0": _orthogonal(rng, cfg.in_dim, cfg.hidden_dim, np.sqrt(2.0)),
        "b0": np.zeros(cfg.hidden_dim),
        "w1": _orthogonal(rng, cfg.hidden_dim, cfg.hidden_dim, np.sqrt(2.0)),
        "b1": np.zeros(cfg.hidden_dim),
        "wa": np.zeros((cfg.hidden_dim, cfg.n_actions)),
        "ba": np.zeros(cfg.n_actions),
        "wv": _orthogonal(rng, cfg.hidden_dim, 1, 1.0),
        "bv": np.zeros(1),
    }


def net_config_of(params: Params) -> NetConfig:
    return NetConfig(
        in_dim=params["w0"].shape[0],
        hidden_dim=params["w0"].shape[1],
        n_actions=params["wa"].shape[1],
    )


def _forward(params: Params, x: np.ndarray):
    z0 = x @ params["w0"] + params["b0"]
    h0 = np.maximum(z0, 0.0)
    z1 = h0 @ params["w1"] + params["b1"]
    h1 = np.maximum(z1, 0.0)
    logits = h1 @ params["wa"] + params["ba"]
    values = (h1 @ params["wv"] + params["bv"])[:, 0]
    return logits, values, (x, z0, h0, z1, h1)


def forward(params: Params, obs_batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batch forward pass: (B, in_dim) -> logits (B, A) and values (B,)."""
    x = np.asarray(obs_batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params["w0"].shape[0]:
        raise ValueError(f"expected batch of shape (B, {params['w0'].shape[0]}), got {x.shape}")
    logits, values, _ = _forward(params, x)
    return logits, values


def policy_forward(params: Params, observation: np.ndarray) -> tuple[np.ndarray, float]:
    """Single observation (any shape, flattened here) -> (logits, value)."""
    flat = np.asarray(observation, dtype=np.float64).ravel()
    if flat.shape[0] != params["w0"].shape[0]:
        raise ValueError(
            f"observation has {flat.shape[0]} entries, network expects {params['w0'].shape[0]}"
        )
    logits, values = forward(params, flat[None, :])
    return logits[0], float(values[0])


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def loss_and_grads(
    params: Params,
    batch: dict,
    clip_eps: float,
    value_coef: float,
    entropy_coef: float,
) -> tuple[float, Params, dict]:
    """Clipped-surrogate loss over a minibatch, its gradients, and diagnostics.

    The minimized loss is
        -mean(min(r*A, clip(r, 1-eps, 1+eps)*A))
        + value_coef * mean((V - returns)^2)
        - entropy_coef * mean(H(pi)).
    """
    x = np.asarray(batch["obs"], dtype=np.float64)
    actions = np.asarray(batch["actions"], dtype=np.int64)
    logp_old = np.asarray(batch["logp_old"], dtype=np.float64)
    adv = np.asarray(batch["advantages"], dtype=np.float64)
    ret = np.asarray(batch["returns"], dtype=np.float64)
    n = x.shape[0]

    logits, values, (x, z0, h0, z1, h1) = _forward(params, x)
    logp_all = log_softmax(logits)
    probs = np.exp(logp_all)
    logp_act = logp_all[np.arange(n), actions]

    ratio = np.exp(logp_act - logp_old)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv
    surrogate = np.minimum(unclipped, clipped)
    policy_loss = -surrogate.mean()

    v_err = values - ret
    value_loss = np.mean(v_err**2)
    entropy_per = -(probs * logp_all).sum(axis=1)
    entropy = entropy_per.mean()

    loss = policy_loss + value_coef * value_loss - entropy_coef * entropy

    # d loss / d logp_act: only the unclipped branch has nonzero slope; when
    # the clipped branch wins strictly, the ratio is outside the band and
    # clip' is 0 there.
    coef = np.where(unclipped <= clipped, ratio * adv, 0.0)
    d_logp_act = -coef / n

    one_hot = np.zeros_like(probs)
    one_hot[np.arange(n), actions] = 1.0
    d_logits = d_logp_act[:, None] * (one_hot - probs)
    # entropy term of the loss: -entropy_coef * mean(H); dH/dz_j = -p_j (logp_j + H)
    d_logits += (entropy_coef / n) * probs * (logp_all + entropy_per[:, None])

    d_values = (2.0 * value_coef / n) * v_err

    grads: Params = {}
    grads["wa"] = h1.T @ d_logits
    grads["ba"] = d_logits.sum(axis=0)
    grads["wv"] = h1.T @ d_values[:, None]
    grads["bv"] = np.array([d_values.sum()])
    d_h1 = d_logits @ params["wa"].T + d_values[:, None] @ params["wv"].T
    d_z1 = d_h1 * (z1 > 0.0)
    grads["w1"] = h0.T @ d_z1
    grads["b1"] = d_z1.sum(axis=0)
    d_h0 = d_z1 @ params["w1"].T
    d_z0 = d_h0 * (z0 > 0.0)
    grads["w0"] = x.T @ d_z0
    grads["b0"] = d_z0.sum(axis=0)

    diagnostics = {
        "loss": float(loss),
        "policy_loss": float(policy_loss),
        "value_loss": float(value_loss),
        "entropy": float(entropy),
        "mean_ratio": float(ratio.mean()),
        "clip_frac": float(np.mean(np.abs(ratio - 1.0) > clip_eps)),
    }
    return float(loss), grads, diagnostics


class Adam:
    """Standard Adam with bias correction; state lives with the trainer."""

    def __init__(self, params: Params, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: Params, grads: Params) -> Params:
        self.t += 1
        out: Params = {}
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for k, p in params.items():
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g**2
            out[k] = p - self.lr * (self.m[k] / bc1) / (np.sqrt(self.v[k] / bc2) + self.eps)
        return out


def policy_to_json(params: Params, rep: str, problem_doc: dict) -> dict:
    cfg = net_config_of(params)
    return {
        "arch": {"in_dim": cfg.in_dim, "hidden_dim": cfg.hidden_dim, "n_actions": cfg.n_actions},
        "layers": [
            {"w": params[wk].tolist(), "b": params[bk].tolist()} for wk, bk in PARAM_LAYERS
        ],
        "rep": rep,
        "problem": problem_doc,
    }


def policy_from_json(doc: dict) -> tuple[Params, dict]:
    """Returns (params, meta) where meta has keys 'arch', 'rep', 'problem'."""
    params: Params = {}
    for (wk, bk), layer in zip(PARAM_LAYERS, doc["layers"]):
        params[wk] = np.asarray(layer["w"], dtype=np.float64)
        params[bk] = np.asarray(layer["b"], dtype=np.float64)
    if params["wv"].ndim == 1:
        params["wv"] = params["wv"][:, None]
    meta = {"arch": doc["arch"], "rep": doc["rep"], "problem": doc["problem"]}
    return params, meta


def save_policy(path: str, params: Params, rep: str, problem_doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(policy_to_json(params, rep, problem_doc), fh)


def load_policy(path: str) -> tuple[Params, dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return policy_from_json(json.load(fh))
