import numpy as np
import pytest

from mihash.errors import ShapeError
from mihash.objectives import (combined_loss, cosine_similarity, reg_loss,
                               sim_loss)

from conftest import fd_grad, random_codes, rel_err


def _pairwise_loss_oracle(h, b):
    """Scalar recomputation by an explicit double loop over pairs."""
    def cos(x, y):
        return float(x @ y / (np.linalg.norm(x) * np.linalg.norm(y)))
    n = h.shape[0]
    total, pairs = 0.0, 0
    for m in range(n):
        for l in range(m + 1, n):
            total += (cos(h[m], h[l]) - cos(b[m], b[l])) ** 2
            pairs += 1
    return total / pairs


def _sim_fd(h, b, step=1e-5):
    # the binarized side rides along with h (pass-through view), so the
    # surrogate for differentiation shifts b by the same perturbation
    return fd_grad(lambda hp: sim_loss(hp, b + (hp - h)).value, h, step)


def test_cosine_identity_and_orthogonal(rng):
    v = rng.normal(size=5)
    assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-12)
    assert cosine_similarity(np.array([1.0, 0.0]),
                             np.array([0.0, 1.0])) == pytest.approx(0.0)


def test_cosine_analytic_value():
    got = cosine_similarity(np.array([1.0, 0.0]), np.array([1.0, 1.0]))
    assert got == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-12)


def test_cosine_rejects_zero_norm():
    with pytest.raises(ShapeError):
        cosine_similarity(np.zeros(3), np.ones(3))


def test_sim_loss_zero_when_codes_imitate_perfectly(rng):
    b = random_codes(rng, 6, 8)
    out = sim_loss(b.copy(), b)
    assert out.value == pytest.approx(0.0, abs=1e-12)


def test_sim_loss_two_sample_worst_case():
    h = np.array([[1.0, 0.0], [2.0, 0.0]])        # cos(h1, h2) = 1
    b = np.array([[1.0, 1.0], [-1.0, -1.0]])      # cos(b1, b2) = -1
    # the norm guard in the loss perturbs cosines at the 1e-12 level
    assert sim_loss(h, b).value == pytest.approx(4.0, abs=1e-9)


def test_sim_loss_matches_double_loop_oracle(rng):
    h = rng.normal(size=(8, 12))
    b = random_codes(rng, 8, 12)
    assert sim_loss(h, b).value == pytest.approx(
        _pairwise_loss_oracle(h, b), rel=1e-12)


def test_sim_loss_gradient_matches_fd(rng):
    h = rng.normal(size=(8, 10))
    b = random_codes(rng, 8, 10)
    out = sim_loss(h, b)
    assert rel_err(_sim_fd(h, b), out.grad_h) < 1e-5


def test_sim_loss_rejects_single_sample():
    with pytest.raises(ShapeError):
        sim_loss(np.ones((1, 4)), np.ones((1, 4)))


def test_reg_loss_zero_at_codes(rng):
    b = random_codes(rng, 5, 6)
    assert reg_loss(b.copy(), b).value == 0.0


def test_reg_loss_hand_values():
    out = reg_loss(np.array([[0.5]]), np.array([[1.0]]))
    assert out.value == pytest.approx(0.25)
    assert out.grad_h[0, 0] == pytest.approx(-1.0)


def test_reg_loss_gradient_matches_fd(rng):
    h = rng.normal(size=(7, 9))
    b = random_codes(rng, 7, 9)
    out = reg_loss(h, b)
    fd = fd_grad(lambda hp: reg_loss(hp, b).value, h)
    assert rel_err(fd, out.grad_h) < 1e-6


def test_combined_alpha_zero_equals_sim(rng):
    h = rng.normal(size=(5, 6))
    b = random_codes(rng, 5, 6)
    combo = combined_loss(h, b, 0.0)
    sim = sim_loss(h, b)
    assert combo.value == sim.value
    assert np.array_equal(combo.grad_h, sim.grad_h)


def test_combined_decomposes(rng):
    h = rng.normal(size=(5, 6))
    b = random_codes(rng, 5, 6)
    combo = combined_loss(h, b, 0.1)
    expect = sim_loss(h, b).value + 0.1 * reg_loss(h, b).value
    assert combo.value == pytest.approx(expect, rel=1e-12)


def test_combined_gradient_is_linear(rng):
    h = rng.normal(size=(6, 4))
    b = random_codes(rng, 6, 4)
    combo = combined_loss(h, b, 0.3)
    parts = sim_loss(h, b).grad_h + 0.3 * reg_loss(h, b).grad_h
    assert np.allclose(combo.grad_h, parts, atol=1e-15)


def test_combined_rejects_negative_alpha(rng):
    with pytest.raises(ShapeError):
        combined_loss(np.ones((2, 2)), np.ones((2, 2)), -0.1)


def test_gradient_agreement_over_many_batches():
    # 20 random batches, both losses, 1e-4 relative against central FD
    gen = np.random.default_rng(42)
    for _ in range(20):
        h = gen.normal(size=(8, 16)) * gen.uniform(0.5, 2.0)
        b = np.where(gen.random((8, 16)) < 0.5, 1.0, -1.0)
        assert rel_err(_sim_fd(h, b), sim_loss(h, b).grad_h) < 1e-4
        fd_reg = fd_grad(lambda hp: reg_loss(hp, b).value, h)
        assert rel_err(fd_reg, reg_loss(h, b).grad_h) < 1e-4


def test_reg_zero_iff_binary(rng):
    h = random_codes(rng, 4, 5)
    assert reg_loss(h, h.copy()).value == 0.0
    h2 = h.copy()
    h2[0, 0] = 0.5
    assert reg_loss(h2, h).value > 0.0
