"""Brute-force ground truth used to check the analytic results.

* exhaustive deterministic-strategy maxima of the Bell functionals,
* explicit measurement-dependent models (settings correlated with the source),
  including the model that makes the Mermin bound tight and the lift that
  turns it into a no-signaling one,
* random causal models sampled from a DAG,
* a randomized search for the least mutual information reaching a Bell value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import bell as bf
from .bounds import chsh_mi_lower, mermin_mi_lower
from .causal_graphs import Dag
from .errors import CapacityError, ShapeError
from .probtab import Distribution, marginal, mutual_information

MAX_CGLMP_D = 4
MAX_SAMPLE_CARD = 8
MAX_SAMPLE_SIZE = 1 << 22

INPUT_NAMES = {2: ("X", "Y"), 3: ("X", "Y", "Z")}
OUTPUT_NAMES = {2: ("A", "B"), 3: ("A", "B", "C")}

# Mermin coefficients on the odd cells; even cells do not appear
MERMIN_CELLS = {(0, 0, 1): 1, (0, 1, 0): 1, (1, 0, 0): 1, (1, 1, 1): -1}
CHSH_CELLS = {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1}


def _names(n, table, prefix):
    return table.get(n) or tuple(f"{prefix}{i}" for i in range(1, n + 1))


@dataclass(frozen=True)
class DeterministicStrategy:
    """Output of each party as a function of its own input: ``responses[i][x_i]``."""

    responses: tuple[tuple[int, ...], ...]
    lam: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "responses", tuple(tuple(int(v) for v in r) for r in self.responses))

    def outputs(self, inputs: Sequence[int]) -> tuple[int, ...]:
        return tuple(r[x] for r, x in zip(self.responses, inputs))

    def sign(self, inputs: Sequence[int]) -> int:
        """(-1)^(sum of outputs) at the given inputs (binary outputs)."""
        return -1 if sum(self.outputs(inputs)) % 2 else 1

    def behavior(self, output_cards: Sequence[int] | None = None) -> bf.Behavior:
        n = len(self.responses)
        in_cards = [len(r) for r in self.responses]
        out_cards = output_cards or [max(2, max(r) + 1) for r in self.responses]
        return bf.deterministic_behavior(
            list(zip(_names(n, INPUT_NAMES, "X"), in_cards)),
            list(zip(_names(n, OUTPUT_NAMES, "A"), out_cards)),
            self.responses,
        )


def all_strategies(n_parties: int, n_inputs: int = 2, n_outputs: int = 2):
    per_party = list(itertools.product(range(n_outputs), repeat=n_inputs))
    for combo in itertools.product(per_party, repeat=n_parties):
        yield DeterministicStrategy(combo)


def _functional(name: str):
    """(evaluator, parties, outputs, strategy count) for 'chsh', 'mermin' or 'cglmp:d'."""
    if name == "chsh":
        return bf.chsh, 2, 2
    if name == "mermin":
        return bf.mermin, 3, 2
    if name.startswith("cglmp"):
        try:
            d = int(name.split(":", 1)[1])
        except (IndexError, ValueError):
            raise ValueError(f"write cglmp functionals as 'cglmp:d', got {name!r}") from None
        if d < 2:
            raise ValueError("CGLMP needs d >= 2")
        if d > MAX_CGLMP_D:
            raise CapacityError(f"CGLMP enumeration is capped at d = {MAX_CGLMP_D}")
        return (lambda b: bf.cglmp(b, d)), 2, d
    raise ValueError(f"unknown functional {name!r}")


def max_over_deterministic(functional: str) -> tuple[float, DeterministicStrategy]:
    """Exhaustive maximum over deterministic strategies (2 settings per party)."""
    evaluate, parties, outs = _functional(functional)
    best, arg = -math.inf, None
    for s in all_strategies(parties, 2, outs):
        v = evaluate(s.behavior([outs] * parties))
        if v > best:
            best, arg = v, s
    return best, arg


# -- measurement-dependent models ---------------------------------------------


@dataclass
class MdModel:
    """p(lambda) p(inputs | lambda) with a deterministic strategy per lambda.

    Probability arrays may hold floats or Fractions; ``p_inputs_given_lambda``
    has shape ``(L, *input_cards)``.
    """

    p_lambda: np.ndarray
    p_inputs_given_lambda: np.ndarray
    strategies: list[DeterministicStrategy]
    output_cards: tuple[int, ...] | None = None

    def __post_init__(self):
        self.p_lambda = np.asarray(self.p_lambda)
        self.p_inputs_given_lambda = np.asarray(self.p_inputs_given_lambda)
        L = self.p_lambda.shape[0]
        if self.p_inputs_given_lambda.shape[0] != L or len(self.strategies) != L:
            raise ShapeError("p_lambda, p_inputs_given_lambda and strategies disagree on |Lambda|")
        n = self.p_inputs_given_lambda.ndim - 1
        if any(len(s.responses) != n for s in self.strategies):
            raise ShapeError("every strategy needs one response table per input")
        if self.output_cards is None:
            self.output_cards = (2,) * n
        if abs(float(sum(self.p_lambda)) - 1) > 1e-9:
            raise ValueError("p(lambda) does not sum to 1")
        rows = self.p_inputs_given_lambda.reshape(L, -1).sum(axis=1)
        if any(abs(float(r) - 1) > 1e-9 for r in rows):
            raise ValueError("a row of p(inputs | lambda) does not sum to 1")

    @property
    def n_parties(self) -> int:
        return self.p_inputs_given_lambda.ndim - 1

    @property
    def input_cards(self) -> tuple[int, ...]:
        return self.p_inputs_given_lambda.shape[1:]

    def joint_inputs_lambda(self) -> np.ndarray:
        """p(inputs, lambda) with lambda last (dtype follows the model)."""
        p = self.p_inputs_given_lambda * self.p_lambda.reshape((-1,) + (1,) * self.n_parties)
        return np.moveaxis(p, 0, -1)


def behavior_of(model: MdModel) -> tuple[bf.Behavior, Distribution]:
    """Induced p(outputs | inputs) and the float joint p(inputs, Lambda).

    Input cells of probability zero get uniform outputs.
    """
    n = model.n_parties
    joint = model.joint_inputs_lambda().astype(float)
    pin = joint.sum(axis=-1)
    in_cards, out_cards = model.input_cards, model.output_cards
    table = np.zeros(tuple(in_cards) + tuple(out_cards))
    for x in itertools.product(*(range(c) for c in in_cards)):
        if pin[x] <= 0:
            table[x] = 1.0 / math.prod(out_cards)
            continue
        for lam, s in enumerate(model.strategies):
            w = joint[x + (lam,)]
            if w:
                table[x + s.outputs(x)] += w / pin[x]
    table /= table.reshape(math.prod(in_cards), -1).sum(axis=1).reshape(tuple(in_cards) + (1,) * n)
    ins = list(zip(_names(n, INPUT_NAMES, "X"), in_cards))
    outs = list(zip(_names(n, OUTPUT_NAMES, "A"), out_cards))
    beh = bf.Behavior(ins, outs, table, pin / pin.sum())
    dist = Distribution(ins + [("Lambda", len(model.strategies))], joint / joint.sum())
    return beh, dist


def model_mi(model: MdModel) -> float:
    _, dist = behavior_of(model)
    return mutual_information(dist, [v for v in dist.names if v != "Lambda"], ["Lambda"])


def exact_correlator(model: MdModel, inputs: Sequence[int]):
    """Full correlator at ``inputs`` in the model's own number type."""
    inputs = tuple(inputs)
    num = 0
    den = 0
    for lam, s in enumerate(model.strategies):
        w = model.p_lambda[lam] * model.p_inputs_given_lambda[(lam,) + inputs]
        num = num + w * s.sign(inputs)
        den = den + w
    if den == 0:
        return Fraction(0) if isinstance(model.p_lambda[0], Fraction) else 0.0
    return num / den


def full_dependence_chsh_model() -> MdModel:
    """Lambda copies (x, y); each strategy wins its own cell, giving CHSH = 4."""
    strategies, cond = [], np.zeros((4, 2, 2))
    for lam, (x, y) in enumerate(itertools.product((0, 1), repeat=2)):
        target = CHSH_CELLS[(x, y)]
        s = next(s for s in all_strategies(2) if s.sign((x, y)) == target)
        strategies.append(s)
        cond[lam, x, y] = 1.0
    return MdModel(np.full(4, 0.25), cond, strategies)


def independent_model(n_parties: int, p_inputs=None, strategy: DeterministicStrategy | None = None) -> MdModel:
    """Single-lambda model (no measurement dependence); default all-zero outputs."""
    cards = (2,) * n_parties
    pin = np.full(cards, 1 / 2 ** n_parties) if p_inputs is None else np.asarray(p_inputs)
    strategy = strategy or DeterministicStrategy(((0, 0),) * n_parties)
    return MdModel(np.ones(1), pin.reshape((1,) + cards), [strategy])


# -- the tight Mermin construction ----------------------------------------------


def mermin_classes():
    """The eight classes (mu, eta, nu) with the odd cell each strategy loses."""
    for mu, eta, nu in itertools.product((0, 1), repeat=3):
        special = (eta ^ nu ^ 1, mu ^ nu ^ 1, mu ^ eta ^ 1)
        yield (mu, eta, nu), special


def mermin_class_strategy(mu: int, eta: int, nu: int) -> DeterministicStrategy:
    """A strategy with A1 = (-1)^mu A0, B1 = (-1)^eta B0, C1 = (-1)^nu C0 and
    A0 B0 C0 = (-1)^(mu eta + mu nu + eta nu), found by search over the 64."""
    want = -1 if (mu * eta + mu * nu + eta * nu) % 2 else 1
    for s in all_strategies(3):
        flips = tuple(r[0] ^ r[1] for r in s.responses)
        if flips == (mu, eta, nu) and s.sign((0, 0, 0)) == want:
            return s
    raise AssertionError("no strategy in class")  # pragma: no cover


def _mermin_losses(s: DeterministicStrategy) -> list[tuple[int, ...]]:
    return [cell for cell, coef in MERMIN_CELLS.items() if s.sign(cell) != coef]


def mermin_optimal_md_model(m_target: float, mode: str = "uniform-8", exact: bool = False) -> MdModel:
    """Measurement-dependent model with Mermin value ``m_target`` and
    I(X,Y,Z : Lambda) equal to ``mermin_mi_lower(m_target, mode)``.

    Each class strategy loses exactly one odd cell. That cell gets input
    weight p_min = (4 - M)/8 (halved in uniform-8 mode), the other odd cells
    share the rest, and in uniform-8 mode even cells get 1/8.
    """
    if mode not in ("uniform-8", "odd-4"):
        raise ValueError(f"unknown mode {mode!r}")
    if exact:
        m_target = Fraction(m_target)
    if not 2 <= m_target <= 4:
        raise ValueError(f"Mermin target must lie in [2, 4], got {m_target}")
    one = Fraction(1) if exact else 1.0
    p_min = (4 - m_target) / 8
    strategies, cond = [], np.zeros((8, 2, 2, 2), dtype=object if exact else float)
    for lam, ((mu, eta, nu), special) in enumerate(mermin_classes()):
        s = mermin_class_strategy(mu, eta, nu)
        if _mermin_losses(s) != [special]:
            raise AssertionError(f"class {(mu, eta, nu)} strategy does not lose exactly {special}")
        strategies.append(DeterministicStrategy(s.responses, lam))
        for cell in itertools.product((0, 1), repeat=3):
            odd = sum(cell) % 2 == 1
            if mode == "uniform-8":
                if cell == special:
                    w = p_min / 2
                elif odd:
                    w = (one - p_min) / 6
                else:
                    w = one / 8
            else:
                if cell == special:
                    w = p_min
                elif odd:
                    w = (one - p_min) / 3
                else:
                    w = 0 * one
            cond[(lam,) + cell] = w
    sums = [sum(cond[lam].reshape(-1)) for lam in range(8)]
    if any(abs(float(s) - 1) > 1e-9 for s in sums):
        raise AssertionError(f"class input rows do not sum to 1: {sums}")
    p_lam = np.array([one / 8] * 8, dtype=object if exact else float)
    return MdModel(p_lam, cond, strategies)


# -- Appendix-B style lift to a no-signaling behavior ---------------------------------


def lift_model(model: MdModel) -> MdModel:
    """Add two fair bits l1, l2 independent of everything; outputs become
    (a ^ l1, b ^ l1 ^ l2, c ^ l2). Lambda index becomes 4*lambda + 2*l1 + l2."""
    if model.n_parties != 3 or tuple(model.output_cards) != (2, 2, 2) or tuple(model.input_cards) != (2, 2, 2):
        raise ShapeError("the lift needs a three-party model with binary inputs and outputs")
    quarter = Fraction(1, 4) if isinstance(model.p_lambda[0], Fraction) else 0.25
    p_lam, cond, strategies = [], [], []
    for lam, s in enumerate(model.strategies):
        for l1, l2 in itertools.product((0, 1), repeat=2):
            flips = (l1, l1 ^ l2, l2)
            strategies.append(DeterministicStrategy(
                tuple(tuple(o ^ f for o in r) for r, f in zip(s.responses, flips)), 4 * lam + 2 * l1 + l2))
            p_lam.append(model.p_lambda[lam] * quarter)
            cond.append(model.p_inputs_given_lambda[lam])
    dtype = model.p_lambda.dtype
    return MdModel(np.array(p_lam, dtype=dtype), np.array(cond, dtype=dtype), strategies)


def nosignaling_lift(model: MdModel) -> bf.Behavior:
    return behavior_of(lift_model(model))[0]


def random_md_model(rng: np.random.Generator, n_parties: int = 3, n_lambda: int = 4, exact: bool = False,
                    denominator: int = 64) -> MdModel:
    """Random binary model; with ``exact`` all probabilities are Fractions."""
    cells = 2 ** n_parties

    def simplex(k):
        w = rng.integers(0, denominator, size=k) + 1
        if exact:
            tot = int(w.sum())
            return np.array([Fraction(int(v), tot) for v in w], dtype=object)
        return w / w.sum()

    p_lam = simplex(n_lambda)
    cond = np.array([simplex(cells) for _ in range(n_lambda)], dtype=object if exact else float)
    cond = cond.reshape((n_lambda,) + (2,) * n_parties)
    strategies = [DeterministicStrategy(rng.integers(0, 2, size=(n_parties, 2)).tolist(), lam)
                  for lam in range(n_lambda)]
    return MdModel(p_lam, cond, strategies)


# -- random causal models -----------------------------------------------------


def sample_causal_model(dag: Dag, cardinalities: Mapping[str, int] | None = None, seed: int = 0,
                        keep_latent: bool = False, alpha: float = 1.0,
                        overrides: Mapping[str, np.ndarray] | None = None) -> Distribution:
    """Random Dirichlet(alpha) conditional tables p(node | parents) for every node.

    Unlisted nodes are binary. ``overrides`` fixes a node's table, shaped
    (*parent cards, card) with parents in ``dag.parents`` order. Returns the
    observed marginal, or the full joint with ``keep_latent``.
    """
    cards = {n: 2 for n in dag.names}
    cards.update(cardinalities or {})
    for n, c in cards.items():
        if n not in dag.names:
            raise ValueError(f"cardinality given for unknown node {n!r}")
        if not 1 <= c <= MAX_SAMPLE_CARD:
            raise CapacityError(f"cardinality of {n} must lie in [1, {MAX_SAMPLE_CARD}]")
    names = list(dag.names)
    size = math.prod(cards[n] for n in names)
    if size > MAX_SAMPLE_SIZE:
        raise CapacityError(f"joint table would have {size} entries (limit {MAX_SAMPLE_SIZE})")
    rng = np.random.default_rng(seed)
    overrides = overrides or {}
    joint = np.ones([cards[n] for n in names])
    for node in dag.topological_order():
        parents = list(dag.parents(node))
        shape = [cards[p] for p in parents] + [cards[node]]
        if node in overrides:
            table = np.asarray(overrides[node], dtype=float).reshape(shape)
        else:
            table = rng.dirichlet(np.full(cards[node], alpha), size=math.prod(shape[:-1])).reshape(shape)
        axes = [names.index(p) for p in parents] + [names.index(node)]
        order = np.argsort(axes)
        t = np.transpose(table, order)
        bshape = [1] * len(names)
        for ax in axes:
            bshape[ax] = cards[names[ax]]
        joint = joint * t.reshape(bshape)
    joint /= joint.sum()
    dist = Distribution([(n, cards[n]) for n in names], joint)
    if keep_latent:
        return dist
    return marginal(dist, list(dag.observed))


# -- frontier search --------------------------------------------------------------


def _strategy_signs(n_parties: int, coefs: Mapping[tuple, int]) -> tuple[list[DeterministicStrategy], np.ndarray]:
    """All binary strategies and the signed payoff coef*sign on every cell."""
    strategies = list(all_strategies(n_parties))
    cells = list(itertools.product((0, 1), repeat=n_parties))
    pay = np.zeros((len(cells), len(strategies)))
    for j, s in enumerate(strategies):
        for i, c in enumerate(cells):
            pay[i, j] = coefs.get(c, 0) * s.sign(c)
    return strategies, pay


def _mi_rows(p_in: np.ndarray, rows: np.ndarray) -> float:
    """I(inputs : Lambda) for p(inputs) and rows p(lambda | input)."""
    joint = p_in[:, None] * rows
    p_lam = joint.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(joint > 0, joint / (p_in[:, None] * p_lam[None, :]), 1.0)
        return float(np.sum(np.where(joint > 0, joint * np.log2(ratio), 0.0)))


def _value_rows(pay: np.ndarray, rows: np.ndarray, active: np.ndarray) -> float:
    return float(np.sum((rows * pay).sum(axis=1)[active]))


@dataclass
class FrontierResult:
    target: str
    value: float
    best_mi: float
    analytic: float
    evaluations: int
    seeded: bool

    @property
    def sound(self) -> bool:
        return self.best_mi >= self.analytic - 1e-9


def _seed_rows(target: str, value: float, strategies, cells) -> np.ndarray:
    """p(lambda | inputs) of the known optimal construction, on the full strategy list."""
    index = {s.responses: j for j, s in enumerate(strategies)}
    if target == "mermin":
        model = mermin_optimal_md_model(value, "uniform-8")
    else:
        model = _chsh_optimal_model(value)
    rows = np.zeros((len(cells), len(strategies)))
    joint = model.joint_inputs_lambda().astype(float)
    for i, c in enumerate(cells):
        for lam, s in enumerate(model.strategies):
            rows[i, index[s.responses]] += joint[c + (lam,)]
        rows[i] /= rows[i].sum()
    return rows


def _chsh_optimal_model(value: float) -> MdModel:
    """Eight CHSH-optimal strategies, each losing one cell; the lost cell gets
    weight (4 - CHSH)/8, the other three share the rest."""
    p = (4 - value) / 8
    strategies, cond = [], []
    for s in all_strategies(2):
        lost = [c for c, coef in CHSH_CELLS.items() if s.sign(c) != coef]
        if len(lost) != 1:
            continue
        strategies.append(s)
        t = np.full((2, 2), (1 - p) / 3)
        t[lost[0]] = p
        cond.append(t)
    return MdModel(np.full(len(strategies), 1 / len(strategies)), np.array(cond), strategies)


def md_frontier_search(target: str, value: float, budget: int = 100_000, seed: int = 0,
                       restarts: int = 8, use_seed_model: bool = True) -> FrontierResult:
    """Least I(inputs : Lambda) found over models with uniform inputs whose
    Bell value reaches ``value``.

    Candidates p(lambda | inputs) over all deterministic strategies are
    explored by annealed local moves. A candidate exceeding the target is
    mixed with a measurement-independent model of value exactly 2 until it
    hits the target; mutual information is convex, so this never hurts.
    With ``use_seed_model`` the known optimal construction is one of the
    starting points.
    """
    if target == "chsh":
        n, coefs, lo, hi = 2, CHSH_CELLS, 2.0, 2 * math.sqrt(2)
        analytic = chsh_mi_lower(value)
    elif target == "mermin":
        n, coefs, lo, hi = 3, MERMIN_CELLS, 2.0, 4.0
        analytic = mermin_mi_lower(value, "uniform-8")
    else:
        raise ValueError(f"target must be 'chsh' or 'mermin', got {target!r}")
    if not lo <= value <= hi + 1e-12:
        raise ValueError(f"{target} value {value} outside the quantum range [{lo}, {hi}]")
    strategies, pay = _strategy_signs(n, coefs)
    cells = list(itertools.product((0, 1), repeat=n))
    n_cells, n_strat = pay.shape
    p_in = np.full(n_cells, 1 / n_cells)
    active = np.array([coefs.get(c, 0) != 0 for c in cells])
    # measurement-independent reference with value exactly 2: all outputs 0
    base = np.zeros((n_cells, n_strat))
    base[:, [j for j, s in enumerate(strategies) if all(v == 0 for r in s.responses for v in r)][0]] = 1.0
    base_value = _value_rows(pay, base, active)
    assert abs(base_value - 2) < 1e-12
    rng = np.random.default_rng(seed)
    evals = 0

    def score(rows):
        nonlocal evals
        evals += 1
        v = _value_rows(pay, rows, active)
        if v < value - 1e-12:
            return math.inf
        t = 0.0 if v - base_value <= 1e-15 else max(0.0, min(1.0, (v - value) / (v - base_value)))
        return _mi_rows(p_in, (1 - t) * rows + t * base)

    best, best_start = math.inf, -1
    starts = []
    if use_seed_model and value > 2:
        starts.append(_seed_rows(target, value, strategies, cells))
    if value <= 2:
        starts.append(base.copy())
    while len(starts) < restarts:
        starts.append(rng.dirichlet(np.full(n_strat, 0.2), size=n_cells))
    per_start = max(1, budget // len(starts))
    for k, rows in enumerate(starts):
        cur = score(rows)
        if cur < best:
            best, best_start = cur, k
        temp = 0.05
        for step in range(per_start - 1):
            if evals >= budget:
                break
            cand = rows.copy()
            i = rng.integers(n_cells)
            noise = rng.dirichlet(np.full(n_strat, 0.5))
            eps = rng.choice((0.3, 0.05, 0.005))
            cand[i] = (1 - eps) * cand[i] + eps * noise
            if cur == math.inf:
                # drift toward higher Bell value until feasible
                j = int(np.argmax(pay[i])) if active[i] else int(rng.integers(n_strat))
                cand[i] = (1 - eps) * cand[i]
                cand[i, j] += eps
            s = score(cand)
            if s <= cur or (s < math.inf and cur < math.inf and rng.random() < math.exp(-(s - cur) / temp)):
                rows, cur = cand, s
                if cur < best:
                    best, best_start = cur, k
            temp *= 0.9995
    seeded = best_start == 0 and use_seed_model and value > 2
    return FrontierResult(target, value, best, analytic, evals, seeded)
