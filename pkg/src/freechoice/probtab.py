"""Dense joint distributions over named discrete variables and their
information measures (all in bits)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, DegenerateEventError, UnknownVariableError

NORM_TOL = 1e-12
MAX_VECTOR_VARIABLES = 12


@dataclass(frozen=True)
class VariableSpec:
    name: str
    cardinality: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ValueError(f"variable name must be a non-empty string, got {self.name!r}")
        if int(self.cardinality) != self.cardinality or self.cardinality < 1:
            raise ValueError(f"cardinality of {self.name} must be a positive integer")


class Distribution:
    """Joint probability table, row-major with the last variable fastest.

    The table is stored as an ndarray with one axis per variable and is
    read-only after construction.
    """

    __slots__ = ("variables", "table")

    def __init__(self, variables: Sequence[VariableSpec | tuple[str, int]], probabilities):
        specs = tuple(v if isinstance(v, VariableSpec) else VariableSpec(*v) for v in variables)
        names = [v.name for v in specs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        shape = tuple(v.cardinality for v in specs)
        arr = np.array(probabilities, dtype=float)
        if arr.size != math.prod(shape):
            raise ValueError(f"table has {arr.size} entries, expected {math.prod(shape)}")
        arr = arr.reshape(shape)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("probabilities must be finite and non-negative")
        total = arr.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "variables", specs)
        object.__setattr__(self, "table", arr)

    def __setattr__(self, key, value):
        raise AttributeError("Distribution is immutable")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.table.shape

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariableError(f"unknown variable {name!r}; have {list(self.names)}") from None

    def cardinality(self, name: str) -> int:
        return self.variables[self.index(name)].cardinality

    def probabilities(self) -> np.ndarray:
        return self.table.reshape(-1)

    def __repr__(self):
        vs = ", ".join(f"{v.name}:{v.cardinality}" for v in self.variables)
        return f"Distribution({vs})"

    def __eq__(self, other):
        return (
            isinstance(other, Distribution)
            and self.variables == other.variables
            and np.array_equal(self.table, other.table)
        )

    __hash__ = None

    @classmethod
    def uniform(cls, variables):
        specs = [v if isinstance(v, VariableSpec) else VariableSpec(*v) for v in variables]
        n = math.prod(v.cardinality for v in specs)
        return cls(specs, np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, variables, values: Sequence[int]):
        specs = [v if isinstance(v, VariableSpec) else VariableSpec(*v) for v in variables]
        arr = np.zeros(tuple(v.cardinality for v in specs))
        arr[tuple(values)] = 1.0
        return cls(specs, arr)

    @classmethod
    def from_array(cls, names: Sequence[str], array):
        arr = np.asarray(array, dtype=float)
        return cls(list(zip(names, arr.shape)), arr)

    def to_dict(self) -> dict:
        return {
            "variables": [{"name": v.name, "cardinality": v.cardinality} for v in self.variables],
            "probabilities": [float(p) for p in self.probabilities()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Distribution":
        specs = [VariableSpec(v["name"], int(v["cardinality"])) for v in data["variables"]]
        return cls(specs, data["probabilities"])

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "Distribution":
        return cls.from_dict(json.loads(text))


def _as_names(names) -> list[str]:
    if isinstance(names, str):
        return [names]
    return list(names)


def _axes(dist: Distribution, names: Iterable[str]) -> list[int]:
    return sorted({dist.index(n) for n in _as_names(names)})


def marginal(dist: Distribution, keep) -> Distribution:
    """Sum out every variable not in ``keep``; construction order is kept."""
    keep_axes = _axes(dist, keep)
    drop = tuple(i for i in range(len(dist.variables)) if i not in keep_axes)
    table = dist.table.sum(axis=drop) if drop else dist.table
    specs = [dist.variables[i] for i in keep_axes]
    # summation can drift by an ulp; the input was already normalized
    table = np.asarray(table, dtype=float)
    return Distribution(specs, table / table.sum() if specs else table)


def condition(dist: Distribution, on: Mapping[str, int]) -> Distribution:
    """Renormalized slice of ``dist`` at the assignment ``on``."""
    index: list = [slice(None)] * len(dist.variables)
    for name, value in on.items():
        i = dist.index(name)
        if not 0 <= value < dist.variables[i].cardinality:
            raise ValueError(f"value {value} out of range for {name}")
        index[i] = value
    sliced = dist.table[tuple(index)]
    mass = sliced.sum()
    if mass <= 0:
        raise DegenerateEventError(f"conditioning event {dict(on)} has probability 0")
    specs = [v for v in dist.variables if v.name not in on]
    return Distribution(specs, sliced / mass)


def _entropy_of_table(table: np.ndarray) -> float:
    p = table[table > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(dist: Distribution, subset=None) -> float:
    """Shannon entropy in bits of the marginal on ``subset`` (all variables if None)."""
    if subset is None:
        return _entropy_of_table(dist.table)
    axes = _axes(dist, subset)
    if not axes:
        return 0.0
    drop = tuple(i for i in range(dist.table.ndim) if i not in axes)
    return _entropy_of_table(dist.table.sum(axis=drop) if drop else dist.table)


def _disjoint(*groups) -> list[list[str]]:
    sets = [_as_names(g) for g in groups]
    seen: set[str] = set()
    for s in sets:
        if seen & set(s):
            raise ValueError(f"variable sets overlap: {sets}")
        seen |= set(s)
    return sets


def mutual_information(dist: Distribution, a, b) -> float:
    a, b = _disjoint(a, b)
    return entropy(dist, a) + entropy(dist, b) - entropy(dist, a + b)


def conditional_mutual_information(dist: Distribution, a, b, given) -> float:
    a, b, c = _disjoint(a, b, given)
    return (
        entropy(dist, a + c)
        + entropy(dist, b + c)
        - entropy(dist, a + b + c)
        - entropy(dist, c)
    )


def tripartite_information(dist: Distribution, a, b, c) -> float:
    """I(A:B:C) = H(ABC) - H(AB) - H(AC) - H(BC) + H(A) + H(B) + H(C); can be negative."""
    a, b, c = _disjoint(a, b, c)
    h = lambda s: entropy(dist, s)  # noqa: E731
    return h(a + b + c) - h(a + b) - h(a + c) - h(b + c) + h(a) + h(b) + h(c)


def l1_md_measure(dist: Distribution, inputs, lam: str = "Lambda") -> float:
    """L1 distance between p(inputs, lambda) and p(inputs) p(lambda).

    ``dist`` may contain other variables; they are summed out first.
    """
    inputs = _as_names(inputs)
    if lam not in dist.names:
        raise ValueError(f"source variable {lam!r} missing from {list(dist.names)}")
    if lam in inputs:
        raise ValueError("source variable cannot also be an input")
    joint = marginal(dist, inputs + [lam])
    li = joint.index(lam)
    t = np.moveaxis(joint.table, li, -1)
    p_in = t.sum(axis=-1, keepdims=True)
    p_lam = t.reshape(-1, t.shape[-1]).sum(axis=0)
    return float(np.abs(t - p_in * p_lam).sum())


@dataclass(frozen=True)
class EntropyVector:
    """H(S) for every nonempty subset S, indexed by bitmask - 1.

    Bit i of the mask corresponds to ``names[i]``.
    """

    names: tuple[str, ...]
    values: np.ndarray

    def __getitem__(self, subset) -> float:
        return float(self.values[self.mask(subset) - 1])

    def mask(self, subset) -> int:
        m = 0
        for n in _as_names(subset):
            try:
                m |= 1 << self.names.index(n)
            except ValueError:
                raise UnknownVariableError(f"unknown variable {n!r}") from None
        return m


def entropy_vector(dist: Distribution) -> EntropyVector:
    n = len(dist.variables)
    if n > MAX_VECTOR_VARIABLES:
        raise CapacityError(f"entropy vector limited to {MAX_VECTOR_VARIABLES} variables, got {n}")
    values = np.empty((1 << n) - 1)
    for mask in range(1, 1 << n):
        axes = [i for i in range(n) if mask >> i & 1]
        values[mask - 1] = entropy(dist, [dist.names[i] for i in axes])
    values.setflags(write=False)
    return EntropyVector(dist.names, values)


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)
