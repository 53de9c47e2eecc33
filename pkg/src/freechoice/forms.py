"""Entropy coordinate spaces and exact linear forms over them.

A space over variables ``v0..v{n-1}`` has one coordinate per nonempty subset,
addressed by bitmask (bit i <-> ``vi``) at column ``mask - 1``, followed by
any named auxiliary coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence

from .errors import UnknownVariableError


@dataclass(frozen=True)
class EntropyCoordinateSpace:
    variables: tuple[str, ...]
    aux: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "aux", tuple(self.aux))
        names = self.variables + self.aux
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate names in coordinate space: {names}")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def dim(self) -> int:
        return (1 << self.n) - 1 + len(self.aux)

    def mask(self, subset: Iterable[str]) -> int:
        m = 0
        for name in subset:
            try:
                m |= 1 << self.variables.index(name)
            except ValueError:
                raise UnknownVariableError(f"unknown variable {name!r}") from None
        return m

    def subset(self, mask: int) -> tuple[str, ...]:
        return tuple(v for i, v in enumerate(self.variables) if mask >> i & 1)

    def column(self, key) -> int:
        """Column of an entropy coordinate (iterable of names, or bitmask int)
        or an auxiliary coordinate (its name)."""
        if isinstance(key, str):
            if key in self.aux:
                return (1 << self.n) - 1 + self.aux.index(key)
            key = [k for k in key.split(",") if k]
        if isinstance(key, int):
            m = key
        else:
            m = self.mask(key)
        if not 0 < m < 1 << self.n:
            raise ValueError(f"no coordinate for mask {m}")
        return m - 1

    def label(self, col: int) -> str:
        """Serialization key: comma-joined sorted names, or the aux name."""
        base = (1 << self.n) - 1
        if col >= base:
            return self.aux[col - base]
        return ",".join(sorted(self.subset(col + 1)))

    def pretty(self, col: int) -> str:
        base = (1 << self.n) - 1
        if col >= base:
            return self.aux[col - base]
        return "H(" + ",".join(self.subset(col + 1)) + ")"


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floating-point coefficients are not accepted; use Fraction or str")
    return Fraction(x)


@dataclass(frozen=True)
class LinForm:
    """``sum(coeffs[i] * coord[i]) + const`` with exact rational coefficients."""

    space: EntropyCoordinateSpace
    coeffs: tuple[Fraction, ...]
    const: Fraction = Fraction(0)

    @classmethod
    def build(cls, space: EntropyCoordinateSpace, terms: Mapping | Iterable = (), const=0) -> "LinForm":
        """Build from ``{key: coeff}`` or ``[(key, coeff), ...]``; repeated keys add up.

        Keys are anything ``space.column`` accepts: a tuple of variable names,
        a comma-joined string, or an auxiliary name.
        """
        coeffs = [Fraction(0)] * space.dim
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, c in items:
            coeffs[space.column(key)] += _frac(c)
        return cls(space, tuple(coeffs), _frac(const))

    @classmethod
    def zero(cls, space):
        return cls(space, (Fraction(0),) * space.dim, Fraction(0))

    def __add__(self, other: "LinForm") -> "LinForm":
        self._check(other)
        return LinForm(
            self.space,
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
            self.const + other.const,
        )

    def __neg__(self) -> "LinForm":
        return LinForm(self.space, tuple(-a for a in self.coeffs), -self.const)

    def __sub__(self, other: "LinForm") -> "LinForm":
        return self + (-other)

    def __mul__(self, k) -> "LinForm":
        k = _frac(k)
        return LinForm(self.space, tuple(a * k for a in self.coeffs), self.const * k)

    __rmul__ = __mul__

    def _check(self, other):
        if self.space != other.space:
            raise ValueError("linear forms live in different coordinate spaces")

    def support(self) -> list[int]:
        return [i for i, c in enumerate(self.coeffs) if c]

    def is_constant(self) -> bool:
        return not any(self.coeffs)

    def evaluate(self, point: Sequence) -> Fraction | float:
        total = self.const
        for c, x in zip(self.coeffs, point):
            if c:
                total = total + c * x if isinstance(x, Fraction) else float(total) + float(c) * float(x)
        return total

    def canonical(self, equality: bool = False) -> "LinForm":
        """Scale to coprime integers. Equalities are also sign-fixed so the
        leading nonzero coefficient is positive."""
        return LinForm(self.space, *_canonical_ints(self.coeffs, self.const, equality, as_fraction=True))

    def key(self) -> tuple:
        return self.coeffs + (self.const,)

    def terms(self) -> dict[str, Fraction]:
        return {self.space.label(i): c for i, c in enumerate(self.coeffs) if c}

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            coef = "" if mag == 1 else f"{mag}*"
            parts.append(f"{sign} {coef}{self.space.pretty(i)}")
        if self.const:
            parts.append(f"{'-' if self.const < 0 else '+'} {abs(self.const)}")
        if not parts:
            return "0"
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


def _canonical_ints(coeffs, const, equality, as_fraction=False):
    vals = list(coeffs) + [const]
    denom = reduce(lambda a, b: a * b // math.gcd(a, b), (Fraction(v).denominator for v in vals), 1)
    ints = [int(Fraction(v) * denom) for v in vals]
    g = reduce(math.gcd, ints, 0)
    if g > 1:
        ints = [v // g for v in ints]
    if equality:
        lead = next((v for v in ints if v), 0)
        if lead < 0:
            ints = [-v for v in ints]
    if as_fraction:
        return tuple(Fraction(v) for v in ints[:-1]), Fraction(ints[-1])
    return tuple(ints[:-1]), ints[-1]


# -- information-measure builders -------------------------------------------


def _names(s) -> tuple[str, ...]:
    if isinstance(s, str):
        return (s,)
    return tuple(s)


def entropy_form(space, subset, coeff=1) -> LinForm:
    subset = _names(subset)
    if not subset:
        return LinForm.zero(space)
    return LinForm.build(space, [(subset, coeff)])


def conditional_entropy_form(space, a, given=()) -> LinForm:
    a, c = _names(a), _names(given)
    return entropy_form(space, a + c) - entropy_form(space, c)


def mi_form(space, a, b, given=()) -> LinForm:
    """I(A:B|C) = H(AC) + H(BC) - H(ABC) - H(C)."""
    a, b, c = _names(a), _names(b), _names(given)
    return (
        entropy_form(space, a + c)
        + entropy_form(space, b + c)
        - entropy_form(space, a + b + c)
        - entropy_form(space, c)
    )


def tripartite_form(space, a, b, c) -> LinForm:
    a, b, c = _names(a), _names(b), _names(c)
    h = lambda s: entropy_form(space, s)  # noqa: E731
    return h(a + b + c) - h(a + b) - h(a + c) - h(b + c) + h(a) + h(b) + h(c)


def aux_form(space, name, coeff=1) -> LinForm:
    return LinForm.build(space, [(name, coeff)])
