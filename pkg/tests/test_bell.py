import itertools
import math

import numpy as np
import pytest

from freechoice import bell as bf
from freechoice.errors import ShapeError, UnknownVariableError
from freechoice.probtab import Distribution


def uniform_behavior(n=2, card=2):
    ins = [(f"X{i}", 2) for i in range(n)]
    outs = [(f"A{i}", card) for i in range(n)]
    return bf.Behavior(ins, outs, np.full((2,) * n + (card,) * n, card ** -n))


def test_behavior_validation():
    with pytest.raises(ValueError):
        bf.Behavior([("X", 2)], [("A", 2)], [[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(ShapeError):
        bf.Behavior([("X", 2)], [("A", 2)], [0.5, 0.5, 0.5])
    with pytest.raises(ValueError):
        bf.Behavior([("X", 2)], [("X", 2)], [[0.5, 0.5], [0.5, 0.5]])


def test_behavior_immutable_and_json():
    b = bf.pr_box()
    with pytest.raises(AttributeError):
        b.table = None
    with pytest.raises(ValueError):
        b.table[0, 0, 0, 0] = 1
    back = bf.Behavior.from_json(b.to_json())
    np.testing.assert_array_equal(back.table, b.table)
    assert back.input_names == ("X", "Y")
    assert set(b.to_dict()) >= {"inputs", "outputs", "table"}


def test_joint_uses_input_distribution():
    b = bf.Behavior([("X", 2)], [("A", 2)], [[1, 0], [0, 1]], input_distribution=[0.25, 0.75])
    np.testing.assert_allclose(b.joint().table, [[0.25, 0], [0, 0.75]])
    # uniform by default
    b2 = bf.Behavior([("X", 2)], [("A", 2)], [[1, 0], [0, 1]])
    np.testing.assert_allclose(b2.joint().table, [[0.5, 0], [0, 0.5]])


def test_behavior_from_distribution_fills_empty_rows():
    t = np.zeros((2, 2))
    t[0, 1] = 1.0
    d = Distribution([("X", 2), ("A", 2)], t)
    b = bf.behavior_from_distribution(d, ["X"], ["A"])
    np.testing.assert_allclose(b.table, [[0, 1], [0.5, 0.5]])
    np.testing.assert_allclose(b.input_distribution, [1, 0])


def test_behavior_from_distribution_orders_and_marginalises():
    rng = np.random.default_rng(3)
    t = rng.random((2, 2, 3, 2))
    d = Distribution([("A", 2), ("X", 2), ("L", 3), ("Y", 2)], t / t.sum())
    b = bf.behavior_from_distribution(d, ["X", "Y"], ["A"])
    p = (t / t.sum()).sum(axis=2)  # A, X, Y
    expected = p[:, 0, 1] / p[:, 0, 1].sum()
    np.testing.assert_allclose(b.conditional((0, 1)), expected)


def test_pr_box():
    pr = bf.pr_box()
    assert bf.chsh(pr) == pytest.approx(4.0)
    ok, worst = bf.is_no_signaling(pr)
    assert ok and worst == 0.0


def test_signaling_box_is_flagged():
    t = np.zeros((2, 2, 2, 2))
    for x, y in itertools.product((0, 1), repeat=2):
        t[x, y, y, 0] = 1.0  # Alice outputs Bob's input
    ok, worst = bf.is_no_signaling(bf.Behavior([("X", 2), ("Y", 2)], [("A", 2), ("B", 2)], t))
    assert not ok
    assert worst == pytest.approx(1.0)


def test_correlator_examples():
    pr = bf.pr_box()
    assert bf.correlator(pr, (1, 1)) == pytest.approx(-1)
    assert bf.correlator(pr, {"X": 0, "Y": 1}) == pytest.approx(1)
    assert bf.correlator(pr, (0, 0), outputs=["A"]) == pytest.approx(0)
    with pytest.raises(UnknownVariableError):
        bf.correlator(pr, (0, 0), outputs=["Q"])


@pytest.mark.parametrize("responses", list(itertools.product(range(4), repeat=2)))
def test_deterministic_chsh_within_classical_bound(responses):
    table = [(0, 0), (0, 1), (1, 0), (1, 1)]
    b = bf.deterministic_behavior([("X", 2), ("Y", 2)], [("A", 2), ("B", 2)],
                                  [table[responses[0]], table[responses[1]]])
    assert abs(bf.chsh(b)) <= 2 + 1e-12


def test_chsh_shape_checks():
    with pytest.raises(ShapeError):
        bf.chsh(uniform_behavior(3))
    with pytest.raises(ShapeError):
        bf.mermin(bf.pr_box())


def test_cglmp_two_outcomes_is_a_chsh_variant():
    pr = bf.pr_box()
    e = lambda x, y: bf.correlator(pr, (x, y))  # noqa: E731
    assert bf.cglmp(pr, 2) == pytest.approx(e(0, 0) + e(0, 1) - e(1, 0) + e(1, 1))
    assert bf.cglmp(uniform_behavior(card=2), 2) == pytest.approx(0)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_cglmp_algebraic_maximum(d):
    # p(a_x = b_y + k) reads sum_j p(a=j, b=j+k), so b = a - [x=1, y=0]
    # saturates every positive term
    t = np.zeros((2, 2, d, d))
    for x, y, a in itertools.product((0, 1), (0, 1), range(d)):
        t[x, y, a, (a - (x == 1 and y == 0)) % d] = 1 / d
    b = bf.Behavior([("X", 2), ("Y", 2)], [("A", d), ("B", d)], t)
    assert bf.is_no_signaling(b)[0]
    assert bf.cglmp(b, d) == pytest.approx(4.0)


def test_cglmp_uniform_noise_is_zero():
    assert bf.cglmp(uniform_behavior(card=3), 3) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        bf.cglmp(bf.pr_box(), 1)


def test_mermin_examples():
    # uniform a, b with a+b+c = 1 exactly on (1,1,1): every Mermin term is saturated
    t = np.zeros((2,) * 6)
    for x, y, z in itertools.product((0, 1), repeat=3):
        parity = int((x, y, z) == (1, 1, 1))
        for a, b in itertools.product((0, 1), repeat=2):
            t[x, y, z, a, b, a ^ b ^ parity] = 0.25
    box = bf.Behavior([("X", 2), ("Y", 2), ("Z", 2)], [("A", 2), ("B", 2), ("C", 2)], t)
    assert bf.mermin(box) == pytest.approx(4.0)
    assert bf.is_no_signaling(box)[0]
    assert bf.mermin(uniform_behavior(3)) == pytest.approx(0)


def _chain_behavior(mid_card, rule):
    t = np.zeros((2, 2, 2, mid_card, 2))
    for x1, x3 in itertools.product((0, 1), repeat=2):
        for outs, p in rule(x1, x3):
            t[(x1, x3) + outs] += p
    return bf.Behavior([("X1", 2), ("X3", 2)], [("A1", 2), ("A2", mid_card), ("A3", 2)], t)


def test_bilocality_deterministic_and_normalisation():
    b = _chain_behavior(2, lambda x1, x3: [((0, 0, 0), 1.0)])
    i, j, value = bf.bilocality(b)
    assert (i, j, value) == pytest.approx((4.0, 0.0, 2.0))
    i2, j2, v2 = bf.bilocality(b, normalize=True)
    assert (i2, j2, v2) == pytest.approx((1.0, 0.0, 1.0))
    assert bf.chain_nlocality(b, 2) == pytest.approx(value)


def test_bilocality_split_bits():
    # middle output o = 2*b0 + b1; I reads b0, J reads b1; a3 = x1 x3
    def rule(o):
        return lambda x1, x3: [((0, o, x1 * x3), 1.0)]

    # b0 = 0, b1 = 1: I = sum (-1)^(x1 x3) = 2, J = -sum (-1)^(x1+x3+x1 x3) = 2
    assert bf.bilocality(_chain_behavior(4, rule(1)))[:2] == pytest.approx((2.0, 2.0))
    # b0 = 1, b1 = 0 flips I and J
    assert bf.bilocality(_chain_behavior(4, rule(2)))[:2] == pytest.approx((-2.0, -2.0))
    # b0 = 1, b1 = 1: I flips, J keeps the b1 = 1 sign
    assert bf.bilocality(_chain_behavior(4, rule(3)))[:2] == pytest.approx((-2.0, 2.0))


def test_chain_shape_checks():
    with pytest.raises(ShapeError):
        bf.bilocality(bf.pr_box())
    b = _chain_behavior(4, lambda x1, x3: [((0, 0, 0), 1.0)])
    with pytest.raises(ShapeError):
        bf.bilocality(b, split=False)


def test_default_parties_for_chain():
    b = _chain_behavior(2, lambda x1, x3: [((0, 0, 0), 1.0)])
    assert bf.default_parties(b) == [(("X1",), ("A1",)), ((), ("A2",)), (("X3",), ("A3",))]
    assert bf.is_no_signaling(b)[0]


def test_bilocality_of_shared_randomness_stays_bilocal():
    rng = np.random.default_rng(11)
    for _ in range(50):
        # product of two independent sources with deterministic responses
        acc = np.zeros((2, 2, 2, 2, 2))
        w1, w2 = rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2))
        f1 = rng.integers(0, 2, (2, 2))
        f2 = rng.integers(0, 2, (2, 2, 2))
        f3 = rng.integers(0, 2, (2, 2))
        for l1, l2, x1, x3 in itertools.product((0, 1), repeat=4):
            acc[x1, x3, f1[l1, x1], f2[l1, l2, 0], f3[l2, x3]] += w1[l1] * w2[l2]
        b = bf.Behavior([("X1", 2), ("X3", 2)], [("A1", 2), ("A2", 2), ("A3", 2)], acc)
        assert bf.bilocality(b)[2] <= 2 + 1e-9
        assert math.isclose(bf.bilocality(b, normalize=True)[2], bf.bilocality(b)[2] / 2)
