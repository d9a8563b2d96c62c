import numpy as np
import pytest

from pcgrl.nets import (
    Adam,
    NetConfig,
    forward,
    init_params,
    log_softmax,
    loss_and_grads,
    policy_forward,
    policy_from_json,
    policy_to_json,
    softmax,
)
from pcgrl.rng import make_rng


def tiny_batch(rng, in_dim, n_actions, batch_size):
    return {
        "obs": rng.standard_normal((batch_size, in_dim)),
        "actions": rng.integers(0, n_actions, size=batch_size),
        "logp_old": -np.abs(rng.standard_normal(batch_size)) - 0.2,
        "advantages": rng.standard_normal(batch_size),
        "returns": rng.standard_normal(batch_size),
    }


def numeric_gradient(params, key, batch, eps=1e-6, **loss_kwargs):
    """Central finite differences of the full loss wrt one parameter array."""
    grad = np.zeros_like(params[key])
    flat = grad.ravel()
    base = params[key].copy()
    for i in range(flat.size):
        for sign in (+1, -1):
            bumped = base.copy()
            bumped.ravel()[i] += sign * eps
            trial = dict(params, **{key: bumped})
            loss, _, _ = loss_and_grads(trial, batch, **loss_kwargs)
            flat[i] += sign * loss
    return grad / (2 * eps)


class TestForward:
    def test_zero_actor_head_gives_uniform_policy(self):
        params = init_params(NetConfig(12, 8, 5), make_rng(0))
        logits, value = policy_forward(params, np.ones(12))
        probs = softmax(logits)
        assert np.allclose(probs, 0.2, atol=1e-12)

    def test_deterministic(self):
        params = init_params(NetConfig(6, 4, 3), make_rng(1))
        obs = make_rng(2).standard_normal(6)
        a = policy_forward(params, obs)
        b = policy_forward(params, obs)
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]

    def test_softmax_normalized(self):
        params = init_params(NetConfig(6, 4, 3), make_rng(1))
        params["wa"] = make_rng(3).standard_normal((4, 3))
        logits, _ = policy_forward(params, make_rng(4).standard_normal(6))
        assert abs(softmax(logits).sum() - 1.0) < 1e-9

    def test_shape_mismatch_raises(self):
        params = init_params(NetConfig(6, 4, 3), make_rng(1))
        with pytest.raises(ValueError):
            policy_forward(params, np.ones(7))
        with pytest.raises(ValueError):
            forward(params, np.ones((2, 5)))

    def test_accepts_structured_observation(self):
        params = init_params(NetConfig(24, 4, 3), make_rng(1))
        obs = np.zeros((2, 4, 3), dtype=np.uint8)
        logits, value = policy_forward(params, obs)
        assert logits.shape == (3,)


class TestGradients:
    def test_matches_finite_differences_on_randomized_nets(self):
        # 20 random tiny configurations, every parameter array checked.
        for trial in range(20):
            rng = make_rng(1000 + trial)
            in_dim = int(rng.integers(3, 7))
            hidden = int(rng.integers(3, 6))
            n_actions = int(rng.integers(2, 5))
            params = init_params(NetConfig(in_dim, hidden, n_actions), rng)
            # randomize every array, biases included: zero biases can park a
            # ReLU pre-activation exactly on its kink, where central
            # differences and the subgradient legitimately disagree
            for key in params:
                params[key] = 0.5 * rng.standard_normal(params[key].shape)
            batch = tiny_batch(rng, in_dim, n_actions, batch_size=int(rng.integers(2, 7)))
            kwargs = dict(clip_eps=0.2, value_coef=0.5, entropy_coef=0.01)
            _, grads, _ = loss_and_grads(params, batch, **kwargs)
            for key in params:
                numeric = numeric_gradient(params, key, batch, **kwargs)
                scale = np.maximum(np.abs(numeric), 1e-6)
                rel = np.abs(grads[key] - numeric) / scale
                assert rel.max() < 1e-4, (trial, key, rel.max())

    def test_clip_saturation_zeroes_policy_gradient(self):
        # ratio 1.5 with positive advantage: the clipped branch wins and its
        # slope is zero, so with value/entropy terms off all gradients vanish.
        rng = make_rng(5)
        params = init_params(NetConfig(4, 3, 2), rng)
        params["wa"] = rng.standard_normal((3, 2))
        obs = rng.standard_normal((1, 4))
        logits, _ = forward(params, obs)
        logp = log_softmax(logits)[0]
        batch = {
            "obs": obs,
            "actions": np.array([0]),
            "logp_old": np.array([logp[0] - np.log(1.5)]),
            "advantages": np.array([2.0]),
            "returns": np.array([0.0]),
        }
        _, grads, diag = loss_and_grads(params, batch, clip_eps=0.2, value_coef=0.0, entropy_coef=0.0)
        assert diag["clip_frac"] == 1.0
        for key, g in grads.items():
            assert np.allclose(g, 0.0), key

    def test_ratio_one_on_fresh_batch(self):
        rng = make_rng(8)
        params = init_params(NetConfig(5, 4, 3), rng)
        obs = rng.standard_normal((6, 5))
        logits, values = forward(params, obs)
        actions = rng.integers(0, 3, size=6)
        logp = log_softmax(logits)[np.arange(6), actions]
        adv = rng.standard_normal(6)
        adv = (adv - adv.mean()) / adv.std()
        batch = {
            "obs": obs, "actions": actions, "logp_old": logp,
            "advantages": adv, "returns": values,
        }
        _, _, diag = loss_and_grads(params, batch, clip_eps=0.2, value_coef=0.5, entropy_coef=0.0)
        assert diag["mean_ratio"] == pytest.approx(1.0, abs=1e-12)
        # surrogate equals mean advantage which normalizes to ~0
        assert diag["policy_loss"] == pytest.approx(0.0, abs=1e-9)


class TestAdam:
    def test_descends_a_quadratic(self):
        params = {"w": np.array([5.0, -3.0])}
        opt = Adam(params, lr=0.1)
        for _ in range(500):
            grads = {"w": 2 * params["w"]}
            params = opt.step(params, grads)
        assert np.abs(params["w"]).max() < 1e-3


class TestPolicyFile:
    def test_round_trip_bit_identical(self, tmp_path):
        params = init_params(NetConfig(10, 6, 4), make_rng(3))
        params["wa"] = make_rng(4).standard_normal((6, 4))
        doc = policy_to_json(params, rep="narrow", problem_doc={"name": "binary"})
        restored, meta = policy_from_json(doc)
        for key in params:
            assert np.array_equal(params[key], restored[key]), key
        obs = make_rng(5).standard_normal(10)
        logits_a, value_a = policy_forward(params, obs)
        logits_b, value_b = policy_forward(restored, obs)
        assert np.array_equal(logits_a, logits_b) and value_a == value_b
        assert meta["rep"] == "narrow"

    def test_round_trip_through_file(self, tmp_path):
        import json

        from pcgrl.nets import load_policy, save_policy

        params = init_params(NetConfig(8, 5, 3), make_rng(9))
        path = tmp_path / "policy.json"
        save_policy(str(path), params, "turtle", {"name": "zelda"})
        restored, meta = load_policy(str(path))
        obs = make_rng(10).standard_normal(8)
        logits_a, value_a = policy_forward(params, obs)
        logits_b, value_b = policy_forward(restored, obs)
        assert np.array_equal(logits_a, logits_b) and value_a == value_b
        doc = json.loads(path.read_text())
        assert set(doc) == {"arch", "layers", "rep", "problem"}
        assert len(doc["layers"]) == 4
