import json

import numpy as np
import pytest

from stackplay.rl import (
    ACCURATE,
    IMPRECISE,
    MISS,
    SUCCESS,
    TOUCH,
    ReplayBuffer,
    StackEnv,
    Td3Config,
    checkpoint_actor,
    clamp_rl_action,
    count_stacked,
    episode_rewards,
    evaluate_policy,
    load_policy,
    norm_to_rl,
    outcome_of,
    placement_from_norm,
    reward,
    rl_to_norm,
    save_policy,
    train_policy,
)
from stackplay.rl.td3 import _polyak_into
from stackplay.simworld import featurize


@pytest.fixture(scope="module")
def trained():
    return train_policy(seed=0)


def test_reward_table_exhaustive():
    # closed form: miss -1, touch 9, success 1000 less 100 per extra attempt
    for k in range(1, 11):
        assert reward(MISS, k) == -1.0
        assert reward(TOUCH, k) == 9.0
        assert reward(SUCCESS, k) == 1000.0 - 100.0 * (k - 1)
    assert reward(SUCCESS, 1) == 1000.0
    assert reward(SUCCESS, 10) == 100.0


def test_reward_rejects_out_of_range_attempts():
    for k in (0, 11, -3):
        with pytest.raises(ValueError):
            reward(TOUCH, k)
    with pytest.raises(ValueError):
        reward("flew_away", 1)


def test_action_mapping_round_trip():
    rng = np.random.default_rng(3)
    a = rng.uniform(-1, 1, size=(50, 2))
    assert np.allclose(rl_to_norm(norm_to_rl(a)), a)
    assert np.allclose(norm_to_rl(np.zeros(2)), [500.0, 500.0])
    assert np.allclose(norm_to_rl(np.array([-1.0, 1.0])), [0.0, 1000.0])


def test_any_actor_output_lands_in_range():
    rng = np.random.default_rng(4)
    for raw in rng.normal(scale=2000.0, size=(200, 2)):
        clamped = clamp_rl_action(raw)
        assert np.all(clamped >= 0.0) and np.all(clamped <= 1000.0)
    act = placement_from_norm(np.array([-5.0, 5.0]))
    act.validate()
    assert np.all(np.abs(act.coord) < 1.0)


def test_outcome_classification():
    class Rec:
        def __init__(self, supported, touching):
            self.supported, self.touching = supported, touching

    assert outcome_of(Rec(True, True)) == SUCCESS
    assert outcome_of(Rec(False, True)) == TOUCH
    assert outcome_of(Rec(False, False)) == MISS


def test_env_episode_invariants():
    rng = np.random.default_rng(5)
    env = StackEnv("cylinder", rng)
    for ep in range(30):
        env.reset(episode_id=ep)
        done = False
        cum = 0.0
        while not done:
            rec, r, state, done = env.step(rng.uniform(-1, 1, 2))
            cum += r
            k = rec.attempt_idx + 1
            assert rec.reward == reward(outcome_of(rec), k)
            assert rec.cum_reward == pytest.approx(cum)
            assert rec.mean_reward == pytest.approx(cum / k)
            assert rec.episode_id == ep
            assert rec.stack_height == (2 if rec.supported else 1)
        assert 1 <= len(env.records) <= 10
        if env.records[-1].supported:
            assert all(not r.supported for r in env.records[:-1])
        for prev, cur in zip(env.records, env.records[1:]):
            assert np.array_equal(prev.post_rotation, cur.start_rotation)


def test_env_step_guards():
    env = StackEnv("cube", np.random.default_rng(0))
    with pytest.raises(RuntimeError):
        env.step(np.zeros(2))
    env.reset()
    done = False
    while not done:
        _, _, _, done = env.step(np.array([0.9, 0.9]))
    with pytest.raises(RuntimeError):
        env.step(np.zeros(2))


def test_env_determinism():
    def run(seed):
        rng = np.random.default_rng(seed)
        env = StackEnv("capsule", rng)
        rows = []
        for ep in range(10):
            env.reset(episode_id=ep)
            done = False
            while not done:
                rec, _, _, done = env.step(rng.uniform(-1, 1, 2))
                rows.append(featurize(rec, "rl19"))
        return np.stack(rows)

    assert np.array_equal(run(7), run(7))
    assert not np.array_equal(run(7), run(8))


def test_replay_buffer_wraps():
    buf = ReplayBuffer(32)
    for i in range(40):
        buf.add(np.full(3, i), np.zeros(2), float(i), np.zeros(3), 0.0)
    assert buf.n == 32
    # oldest entries were overwritten
    assert buf.r.min() == 8.0
    s, a, r, s2, cont = buf.sample(16, np.random.default_rng(0))
    assert s.shape == (16, 3) and a.shape == (16, 2) and r.shape == (16,)


def test_polyak_update_fraction():
    rng = np.random.default_rng(9)
    cfg = Td3Config()
    from stackplay.rl.td3 import _mlp
    src = _mlp([3, 8, 8, 2], "tanh", rng)
    tgt = src.copy()
    src.layers[0].W += 1.0
    _polyak_into(tgt, src, 0.995)
    diff = tgt.layers[0].W - (src.layers[0].W - 1.0)
    assert np.allclose(diff, 0.005)


def test_training_reaches_accurate_and_tags_checkpoints(trained):
    assert trained.accurate["quality"] == ACCURATE
    assert trained.imprecise["quality"] == IMPRECISE
    assert trained.total_steps <= Td3Config().max_steps
    assert trained.imprecise["step"] < trained.accurate["step"]
    assert not trained.imprecise_from_fallback
    final = trained.curve[-1]
    assert final.rolling_success >= 0.9


def test_reward_curve_trends_upward(trained):
    rolled = np.array([p.rolling_reward for p in trained.curve])
    blocks = np.array_split(rolled, 5)
    means = [b.mean() for b in blocks]
    for earlier, later in zip(means, means[1:]):
        assert later >= earlier - 30.0
    assert means[-1] > 500.0
    assert means[-1] > means[0]


def test_policy_checkpoint_round_trip(tmp_path, trained):
    p = save_policy(tmp_path / "policy_accurate.json", trained.accurate)
    ckpt = load_policy(p)
    a0 = checkpoint_actor(trained.accurate)
    a1 = checkpoint_actor(ckpt)
    x = np.random.default_rng(2).normal(size=(5, 3))
    assert np.array_equal(a0.logits(x), a1.logits(x))
    p2 = save_policy(tmp_path / "again.json", ckpt)
    assert p.read_bytes() == p2.read_bytes()


def test_load_rejects_foreign_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"format": "something-else"}))
    with pytest.raises(ValueError):
        load_policy(bad)


def test_evaluation_budget_and_determinism(trained):
    eps = evaluate_policy(trained.accurate, "cylinder", timesteps=400, seed=0)
    assert sum(len(e.records) for e in eps) == 400
    again = evaluate_policy(trained.accurate, "cylinder", timesteps=400, seed=0)
    assert np.array_equal(episode_rewards(eps), episode_rewards(again))
    other = evaluate_policy(trained.accurate, "cylinder", timesteps=400, seed=1)
    assert not np.array_equal(episode_rewards(eps), episode_rewards(other))


def test_evaluation_sphere_never_stacks(trained):
    eps = evaluate_policy(trained.accurate, "sphere", timesteps=300, seed=0)
    assert count_stacked(eps) == 0
    assert all(len(e.records) == 10 for e in eps)
    assert np.all(episode_rewards(eps) == 90.0)


def test_accurate_beats_imprecise_on_cube(trained):
    acc = evaluate_policy(trained.accurate, "cube", timesteps=500, seed=0)
    imp = evaluate_policy(trained.imprecise, "cube", timesteps=500, seed=0)
    acc_first = np.mean([e.records[0].supported for e in acc])
    imp_first = np.mean([e.records[0].supported for e in imp])
    assert acc_first >= 0.85
    assert 0.25 <= imp_first <= 0.65
    assert acc_first - imp_first >= 0.2
