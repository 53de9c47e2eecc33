"""Behaviors p(outputs | inputs) and the Bell functionals evaluated on them.

Outputs valued {0, 1} are read as signs via (-1)^a. A behavior's table has
one axis per input followed by one axis per output, and every conditional
slice sums to one.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ShapeError, UnknownVariableError
from .probtab import Distribution, VariableSpec

NORM_TOL = 1e-12


def _specs(vs) -> tuple[VariableSpec, ...]:
    return tuple(v if isinstance(v, VariableSpec) else VariableSpec(*v) for v in vs)


class Behavior:
    """Conditional table p(outputs | inputs) with an optional input distribution."""

    __slots__ = ("inputs", "outputs", "table", "input_distribution")

    def __init__(self, inputs, outputs, table, input_distribution=None):
        ins, outs = _specs(inputs), _specs(outputs)
        names = [v.name for v in ins + outs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        in_shape = tuple(v.cardinality for v in ins)
        out_shape = tuple(v.cardinality for v in outs)
        arr = np.array(table, dtype=float)
        if arr.size != math.prod(in_shape + out_shape):
            raise ShapeError(f"table has {arr.size} entries, expected {math.prod(in_shape + out_shape)}")
        arr = arr.reshape(in_shape + out_shape)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("conditional probabilities must be finite and non-negative")
        sums = arr.reshape(math.prod(in_shape), -1).sum(axis=1)
        worst = np.max(np.abs(sums - 1.0))
        if worst > NORM_TOL:
            raise ValueError(f"conditional slice sums deviate from 1 by {worst:.3g}")
        arr.setflags(write=False)
        pin = None
        if input_distribution is not None:
            pin = np.array(input_distribution, dtype=float).reshape(in_shape)
            if np.any(pin < 0) or abs(pin.sum() - 1.0) > NORM_TOL:
                raise ValueError("input distribution must be non-negative and sum to 1")
            pin.setflags(write=False)
        for key, val in (("inputs", ins), ("outputs", outs), ("table", arr), ("input_distribution", pin)):
            object.__setattr__(self, key, val)

    def __setattr__(self, key, value):
        raise AttributeError("Behavior is immutable")

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.inputs)

    @property
    def output_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.outputs)

    @property
    def input_shape(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.inputs)

    @property
    def output_shape(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.outputs)

    def __repr__(self):
        f = lambda vs: ",".join(f"{v.name}:{v.cardinality}" for v in vs)  # noqa: E731
        return f"Behavior(outputs=[{f(self.outputs)}] | inputs=[{f(self.inputs)}])"

    def conditional(self, inputs: Sequence[int]) -> np.ndarray:
        return self.table[tuple(inputs)]

    def to_dict(self) -> dict:
        d = {
            "inputs": [{"name": v.name, "cardinality": v.cardinality} for v in self.inputs],
            "outputs": [{"name": v.name, "cardinality": v.cardinality} for v in self.outputs],
            "table": [float(p) for p in self.table.reshape(-1)],
        }
        if self.input_distribution is not None:
            d["input_distribution"] = [float(p) for p in self.input_distribution.reshape(-1)]
        return d

    @classmethod
    def from_dict(cls, data: Mapping) -> "Behavior":
        spec = lambda vs: [VariableSpec(v["name"], int(v["cardinality"])) for v in vs]  # noqa: E731
        return cls(spec(data["inputs"]), spec(data["outputs"]), data["table"], data.get("input_distribution"))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "Behavior":
        return cls.from_dict(json.loads(text))

    def joint(self) -> Distribution:
        """p(inputs, outputs); uses a uniform input distribution if none is attached."""
        pin = self.input_distribution
        if pin is None:
            pin = np.full(self.input_shape, 1.0 / math.prod(self.input_shape))
        k = len(self.inputs)
        arr = self.table * pin.reshape(pin.shape + (1,) * (self.table.ndim - k))
        return Distribution(self.inputs + self.outputs, arr / arr.sum())


def behavior_from_distribution(dist: Distribution, inputs, outputs) -> Behavior:
    """Condition a joint distribution on its inputs to obtain p(outputs | inputs).

    Input rows with zero probability are filled with uniform outputs.
    """
    inputs, outputs = list(inputs), list(outputs)
    names = inputs + outputs
    for n in names:
        dist.index(n)
    drop = tuple(i for i, n in enumerate(dist.names) if n not in names)
    arr = dist.table.sum(axis=drop) if drop else dist.table
    kept = [n for n in dist.names if n in names]
    arr = np.transpose(arr, [kept.index(n) for n in names])
    k = len(inputs)
    pin = arr.sum(axis=tuple(range(k, arr.ndim)))
    out_size = math.prod(arr.shape[k:])
    cond = np.empty_like(arr)
    for idx in np.ndindex(*arr.shape[:k]):
        if pin[idx] > 0:
            cond[idx] = arr[idx] / pin[idx]
        else:
            cond[idx] = 1.0 / out_size
    return Behavior([dist.variables[dist.index(n)] for n in inputs],
                    [dist.variables[dist.index(n)] for n in outputs], cond, pin / pin.sum())


def default_parties(behavior: Behavior) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Pair inputs with outputs.

    Equal counts pair position by position. With more outputs than inputs
    (network chains) the first input goes with the first output, the last
    input with the last output and the middle outputs have no input.
    """
    ins, outs = behavior.input_names, behavior.output_names
    if len(ins) == len(outs):
        return [((i,), (o,)) for i, o in zip(ins, outs)]
    if len(ins) == 2 and len(outs) > 2:
        return [((ins[0],), (outs[0],))] + [((), (o,)) for o in outs[1:-1]] + [((ins[1],), (outs[-1],))]
    raise ShapeError("cannot infer party structure; pass parties explicitly")


def is_no_signaling(behavior: Behavior, tol: float = 1e-10, parties=None) -> tuple[bool, float]:
    """Every group of parties' output marginal must not depend on the other
    parties' inputs. Returns (holds, worst violation)."""
    parties = parties or default_parties(behavior)
    in_names, out_names = behavior.input_names, behavior.output_names
    k = len(in_names)
    worst = 0.0
    for r in range(1, len(parties)):
        for group in itertools.combinations(parties, r):
            own_in = {n for p in group for n in p[0]}
            own_out = {n for p in group for n in p[1]}
            drop_out = tuple(k + j for j, n in enumerate(out_names) if n not in own_out)
            marg = behavior.table.sum(axis=drop_out) if drop_out else behavior.table
            for i, n in enumerate(in_names):
                if n in own_in:
                    continue
                spread = marg.max(axis=i) - marg.min(axis=i)
                worst = max(worst, float(spread.max()))
    return worst <= tol, worst


def _check_binary(behavior: Behavior, names=None):
    for v in behavior.outputs:
        if (names is None or v.name in names) and v.cardinality != 2:
            raise ShapeError(f"output {v.name} has {v.cardinality} values; correlators need binary outputs")


def _signs(shape) -> np.ndarray:
    """(-1)^(sum of indices) on a grid of binary axes."""
    s = np.ones(shape)
    for ax, c in enumerate(shape):
        v = np.array([1.0, -1.0])
        s = s * v.reshape((1,) * ax + (2,) + (1,) * (len(shape) - ax - 1))
    return s


def correlator(behavior: Behavior, inputs: Sequence[int] | Mapping[str, int], outputs=None) -> float:
    """E = sum (-1)^(sum of outputs) p(outputs | inputs), over ``outputs``
    (default all) with the rest marginalised."""
    if isinstance(inputs, Mapping):
        inputs = [inputs[n] for n in behavior.input_names]
    names = behavior.output_names if outputs is None else tuple(outputs)
    for n in names:
        if n not in behavior.output_names:
            raise UnknownVariableError(f"unknown output {n!r}")
    _check_binary(behavior, names)
    slice_ = behavior.conditional(inputs)
    drop = tuple(j for j, n in enumerate(behavior.output_names) if n not in names)
    marg = slice_.sum(axis=drop) if drop else slice_
    return float(np.sum(marg * _signs(marg.shape)))


def _require(behavior: Behavior, n_inputs: int, in_card, out_card):
    if len(behavior.inputs) != n_inputs or len(behavior.outputs) != n_inputs:
        raise ShapeError(f"expected {n_inputs} inputs and {n_inputs} outputs, got {behavior!r}")
    if any(c != in_card for c in behavior.input_shape):
        raise ShapeError(f"expected {in_card} settings per party, got {behavior.input_shape}")
    if out_card is not None and any(c != out_card for c in behavior.output_shape):
        raise ShapeError(f"expected {out_card} outcomes per party, got {behavior.output_shape}")


def chsh(behavior: Behavior) -> float:
    """E00 + E01 + E10 - E11."""
    _require(behavior, 2, 2, 2)
    e = lambda x, y: correlator(behavior, (x, y))  # noqa: E731
    return e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1)


def _p_shift(behavior: Behavior, x: int, y: int, k: int, d: int) -> float:
    """p(a_x = b_y + k) := sum_j p(a = j, b = j + k mod d | x, y)."""
    t = behavior.conditional((x, y))
    return float(sum(t[j, (j + k) % d] for j in range(d)))


def cglmp(behavior: Behavior, d: int | None = None) -> float:
    """The CGLMP expression I_d (classical bound 2)."""
    if d is None:
        d = behavior.output_shape[0] if behavior.outputs else 0
    if int(d) != d or d < 2:
        raise ValueError(f"CGLMP needs d >= 2, got {d!r}")
    _require(behavior, 2, 2, d)
    p = lambda x, y, k: _p_shift(behavior, x, y, k, d)  # noqa: E731
    # p(b_y = a_x + k) is p(a_x = b_y - k) with the roles swapped
    q = lambda x, y, k: _p_shift(behavior, x, y, -k, d)  # noqa: E731
    total = 0.0
    for k in range(math.ceil(d / 2)):
        w = 1 - 2 * k / (d - 1)
        total += w * (
            p(0, 0, k) + q(1, 0, k + 1) + p(1, 1, k) + q(0, 1, k)
            - p(0, 0, -k - 1) - q(1, 0, -k) - p(1, 1, -k - 1) - q(0, 1, -k - 1)
        )
    return total


def mermin(behavior: Behavior) -> float:
    """<A0 B0 C1> + <A0 B1 C0> + <A1 B0 C0> - <A1 B1 C1>."""
    _require(behavior, 3, 2, 2)
    e = lambda *x: correlator(behavior, x)  # noqa: E731
    return e(0, 0, 1) + e(0, 1, 0) + e(1, 0, 0) - e(1, 1, 1)


def _chain_signs(behavior: Behavior, split: bool) -> tuple[np.ndarray, np.ndarray]:
    """Sign tables over the output grid for the I and J products.

    A 4-valued middle output o = 2*b0 + b1 contributes (-1)^b0 to I and
    (-1)^b1 to J in split-bit mode.
    """
    shape = behavior.output_shape
    sign_i = np.ones(shape)
    sign_j = np.ones(shape)
    for ax, c in enumerate(shape):
        bshape = (1,) * ax + (c,) + (1,) * (len(shape) - ax - 1)
        vals = np.arange(c)
        if c == 2:
            si = sj = 1 - 2 * vals
        elif c == 4 and split and 0 < ax < len(shape) - 1:
            si, sj = 1 - 2 * (vals >> 1), 1 - 2 * (vals & 1)
        else:
            raise ShapeError(f"output {behavior.outputs[ax].name} has unsupported cardinality {c}")
        sign_i = sign_i * si.reshape(bshape)
        sign_j = sign_j * sj.reshape(bshape)
    return sign_i, sign_j


def chain_terms(behavior: Behavior, n: int, normalize: bool = False, split: bool | None = None):
    """(I_n, J_n) for a chain of n sources and n+1 parties."""
    if len(behavior.inputs) != 2 or behavior.input_shape != (2, 2) or len(behavior.outputs) != n + 1:
        raise ShapeError(f"expected 2 binary endpoint inputs and {n + 1} outputs, got {behavior!r}")
    if split is None:
        split = any(c == 4 for c in behavior.output_shape[1:-1])
    sign_i, sign_j = _chain_signs(behavior, split)
    i_val = j_val = 0.0
    for x1, x2 in itertools.product((0, 1), repeat=2):
        t = behavior.conditional((x1, x2))
        i_val += float(np.sum(t * sign_i))
        j_val += (-1) ** (x1 + x2) * float(np.sum(t * sign_j))
    if normalize:
        i_val, j_val = i_val / 4, j_val / 4
    return i_val, j_val


def chain_nlocality(behavior: Behavior, n: int, normalize: bool = False, split: bool | None = None) -> float:
    """sqrt|I_n| + sqrt|J_n| (classical bound 2, or 1 when normalised)."""
    i_val, j_val = chain_terms(behavior, n, normalize, split)
    return math.sqrt(abs(i_val)) + math.sqrt(abs(j_val))


def bilocality(behavior: Behavior, normalize: bool = False, split: bool | None = None) -> tuple[float, float, float]:
    """(I, J, sqrt|I| + sqrt|J|) for the three-party chain.

    By default I and J are plain sums over the four endpoint settings, which
    makes the bilocal bound 2. ``normalize=True`` averages instead (bound 1).
    """
    i_val, j_val = chain_terms(behavior, 2, normalize, split)
    return i_val, j_val, math.sqrt(abs(i_val)) + math.sqrt(abs(j_val))


def pr_box() -> Behavior:
    """a XOR b = x AND y, uniformly."""
    t = np.zeros((2, 2, 2, 2))
    for x, y, a in itertools.product((0, 1), repeat=3):
        t[x, y, a, a ^ (x & y)] = 0.5
    return Behavior([("X", 2), ("Y", 2)], [("A", 2), ("B", 2)], t)


def deterministic_behavior(inputs, outputs, responses) -> Behavior:
    """Behavior of one deterministic strategy.

    ``responses[i]`` maps party i's input value to its output (as a list);
    parties are paired position by position.
    """
    ins, outs = _specs(inputs), _specs(outputs)
    t = np.zeros(tuple(v.cardinality for v in ins + outs))
    for x in itertools.product(*(range(v.cardinality) for v in ins)):
        t[x + tuple(r[xi] for r, xi in zip(responses, x))] = 1.0
    return Behavior(ins, outs, t)
