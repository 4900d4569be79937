import numpy as np
import pytest

from shopfloor.neural.network import NetworkConfig, QNetwork, dueling_q
from shopfloor.sim.encoding import encode_state

from .oracles import finite_difference_gradients, gradient_mismatch


def tiny_config(layout, n_actions, noisy=False, dueling=True):
    return NetworkConfig(
        group_widths=layout.group_widths,
        n_actions=n_actions,
        d_model=8,
        n_heads=1,
        n_self_blocks=1,
        encoder_hidden=8,
        stream_hidden=8,
        dueling=dueling,
        noisy=noisy,
    )


@pytest.fixture
def mini_features(mini_env_factory, mini_scenario, mini_layout):
    env = mini_env_factory()
    state = env.reset(7)
    return encode_state(state, mini_scenario, mini_layout)


def test_dueling_combination_rule():
    q = dueling_q(np.array([1.0]), np.array([1.0, 2.0, 3.0]))
    assert np.allclose(q, [0.0, 1.0, 2.0])


def test_dueling_invariant_to_advantage_shift(rng):
    v = rng.standard_normal(1)
    adv = rng.standard_normal(5)
    c = float(rng.standard_normal())
    assert np.allclose(dueling_q(v, adv), dueling_q(v, adv + c))


def test_dueling_value_shift_moves_all_actions(rng):
    v = rng.standard_normal(1)
    adv = rng.standard_normal(5)
    shifted = dueling_q(v + 2.5, adv)
    assert np.allclose(shifted, dueling_q(v, adv) + 2.5)
    assert np.argmax(shifted) == np.argmax(dueling_q(v, adv))


def test_forward_output_length_and_determinism(mini_scenario, mini_layout, mini_features, rng):
    net = QNetwork(tiny_config(mini_layout, mini_scenario.n_actions), rng)
    q1 = net.q_values(mini_features)
    q2 = net.q_values(mini_features)
    assert q1.shape == (mini_scenario.n_actions,)
    assert np.array_equal(q1, q2)


def test_forward_batch_matches_single(mini_scenario, mini_layout, mini_features, rng):
    net = QNetwork(tiny_config(mini_layout, mini_scenario.n_actions), rng)
    single = net.q_values(mini_features)
    batch = {g: np.stack([a, a]) for g, a in mini_features.items()}
    from shopfloor.neural.tensor import no_grad

    with no_grad():
        stacked = net.forward(batch).data
    assert np.allclose(stacked[0], single)
    assert np.allclose(stacked[1], single)


def test_group_width_mismatch_names_group(mini_scenario, mini_layout, mini_features, rng):
    net = QNetwork(tiny_config(mini_layout, mini_scenario.n_actions), rng)
    broken = dict(mini_features)
    broken["robots"] = np.zeros((1, mini_layout.group_widths["robots"] + 1))
    with pytest.raises(ValueError, match="robots"):
        net.q_values(broken)


def synthetic_case(rng, noisy=False, dueling=True):
    """Toy config where every group has at least one row, so every encoder
    participates in the forward pass."""
    widths = {"humans": 6, "robots": 6, "machines": 5, "materials": 5, "tasks": 7}
    rows = {"humans": 2, "robots": 1, "machines": 1, "materials": 2, "tasks": 3}
    cfg = NetworkConfig(
        group_widths=widths,
        n_actions=rows["tasks"] + 1,
        d_model=8,
        n_heads=1,
        n_self_blocks=1,
        encoder_hidden=8,
        stream_hidden=8,
        dueling=dueling,
        noisy=noisy,
    )
    feats = {g: rng.standard_normal((1, rows[g], widths[g])) for g in widths}
    return QNetwork(cfg, rng), feats, cfg.n_actions


def test_full_network_gradients_match_fd(rng):
    """Whole-pipeline gradient check at toy width, noisy dueling config."""
    net, feats, n_actions = synthetic_case(rng, noisy=True)
    net.set_noise_enabled(True)
    net.resample_noise(rng)
    weights = rng.standard_normal(n_actions)

    from shopfloor.neural.tensor import Tensor

    def build():
        return (net.forward(feats) * Tensor(weights[None])).sum()

    build().backward()
    fd = finite_difference_gradients(lambda: float(build().data), net.named_params(), max_entries=12)
    worst = 0.0
    for name, p in net.named_params():
        worst = max(worst, gradient_mismatch(p.grad, fd[name]))
    assert worst < 1e-3, f"max relative gradient error {worst}"


def test_all_parameters_receive_gradients(rng):
    net, feats, _ = synthetic_case(rng)
    net.zero_grads()
    net.forward(feats).sum().backward()
    missing = [name for name, p in net.named_params() if p.grad is None]
    assert missing == []


def test_unused_group_encoder_keeps_zero_gradient(mini_scenario, mini_layout, mini_features, rng):
    """mini has no machines: that encoder must stay out of the graph."""
    net = QNetwork(tiny_config(mini_layout, mini_scenario.n_actions), rng)
    feats = {g: a[None] for g, a in mini_features.items()}
    net.zero_grads()
    net.forward(feats).sum().backward()
    machine_params = [p for name, p in net.named_params() if name.startswith("enc.machines")]
    assert machine_params and all(p.grad is None for p in machine_params)


def test_clone_produces_identical_outputs(mini_scenario, mini_layout, mini_features, rng):
    net = QNetwork(tiny_config(mini_layout, mini_scenario.n_actions), rng)
    twin = net.clone()
    assert np.array_equal(net.q_values(mini_features), twin.q_values(mini_features))


def test_non_dueling_head(mini_scenario, mini_layout, mini_features, rng):
    net = QNetwork(tiny_config(mini_layout, mini_scenario.n_actions, dueling=False), rng)
    assert net.q_values(mini_features).shape == (mini_scenario.n_actions,)
