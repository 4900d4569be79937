import numpy as np

from shopfloor.neural.optim import Adam
from shopfloor.neural.tensor import Tensor


def test_zero_learning_rate_freezes_params(rng):
    p = Tensor(rng.standard_normal(5), requires_grad=True)
    opt = Adam([("p", p)], lr=0.0)
    before = p.data.copy()
    (p * p).sum().backward()
    opt.step()
    assert np.array_equal(p.data, before)


def test_quadratic_bowl_converges():
    p = Tensor(np.array([5.0]), requires_grad=True)
    opt = Adam([("p", p)], lr=0.05)
    norms = []
    for _ in range(200):
        p.zero_grad()
        loss = (p * p).sum()
        loss.backward()
        opt.step()
        norms.append(abs(float(p.data[0])))
    # Monotone decrease after warm-up and a >50x reduction by the end.
    warm = norms[20:]
    assert all(b <= a + 1e-12 for a, b in zip(warm, warm[1:]))
    assert norms[-1] < 0.1


def test_step_is_deterministic(rng):
    def run():
        local = np.random.default_rng(3)
        p = Tensor(local.standard_normal(4), requires_grad=True)
        opt = Adam([("p", p)], lr=0.01)
        for _ in range(50):
            p.zero_grad()
            ((p - 1.0) ** 2.0).sum().backward()
            opt.step()
        return p.data.copy()

    assert np.array_equal(run(), run())


def test_unused_parameter_not_updated(rng):
    used = Tensor(rng.standard_normal(3), requires_grad=True)
    unused = Tensor(rng.standard_normal(3), requires_grad=True)
    opt = Adam([("used", used), ("unused", unused)], lr=0.1)
    before = unused.data.copy()
    (used * used).sum().backward()
    opt.step()
    assert np.array_equal(unused.data, before)
