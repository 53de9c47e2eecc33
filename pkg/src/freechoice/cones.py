"""Exact polyhedral machinery over entropy coordinates.

A :class:`Cone` is a system ``f_i(h) >= 0``, ``g_j(h) = 0`` of rational
linear forms. Optimization goes through the LP dual: for
``P = {h : A h + b >= 0, E h + d = 0}`` (assumed nonempty),

    min_{h in P} c.h = max { -b.y - d.z : A^T y + E^T z = c, y >= 0 },

so the dual optimum ``(y, z)`` doubles as a Farkas certificate for
implication, and dual infeasibility means the primal is unbounded.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import simplex
from .errors import CapacityError, EliminationAborted
from .forms import EntropyCoordinateSpace, LinForm, _canonical_ints, mi_form

MAX_SHANNON_VARIABLES = 7


@dataclass(frozen=True)
class Cone:
    space: EntropyCoordinateSpace
    inequalities: tuple[LinForm, ...] = ()
    equalities: tuple[LinForm, ...] = ()

    def __post_init__(self):
        ineqs = _dedupe(f.canonical() for f in self.inequalities)
        eqs = _dedupe(f.canonical(equality=True) for f in self.equalities)
        for f in ineqs + eqs:
            if f.space != self.space:
                raise ValueError("constraint lives in a different coordinate space")
        object.__setattr__(self, "inequalities", tuple(ineqs))
        object.__setattr__(self, "equalities", tuple(e for e in eqs if not (e.is_constant() and e.const == 0)))

    @classmethod
    def _raw(cls, space, inequalities, equalities) -> "Cone":
        """Skip canonicalization; callers pass canonical, duplicate-free forms."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "space", space)
        object.__setattr__(obj, "inequalities", tuple(inequalities))
        object.__setattr__(obj, "equalities", tuple(equalities))
        return obj

    def with_constraints(self, inequalities=(), equalities=()) -> "Cone":
        return Cone(
            self.space,
            self.inequalities + tuple(inequalities),
            self.equalities + tuple(equalities),
        )

    def contains(self, point: Sequence, tol: float = 0.0) -> bool:
        """Membership test; exact when ``point`` holds Fractions and tol == 0."""
        for f in self.inequalities:
            if f.evaluate(point) < -tol:
                return False
        for g in self.equalities:
            if abs(g.evaluate(point)) > tol:
                return False
        return True

    def violations(self, point: Sequence) -> list[tuple[str, LinForm, float]]:
        out = []
        for f in self.inequalities:
            v = f.evaluate(point)
            if v < 0:
                out.append((">=", f, float(v)))
        for g in self.equalities:
            v = g.evaluate(point)
            if v != 0:
                out.append(("=", g, float(v)))
        return out

    def used_columns(self) -> list[int]:
        used = set()
        for f in self.inequalities + self.equalities:
            used.update(f.support())
        return sorted(used)

    def __len__(self):
        return len(self.inequalities)


def _dedupe(forms: Iterable[LinForm]) -> list[LinForm]:
    seen = set()
    out = []
    for f in forms:
        k = f.key()
        if k not in seen:
            seen.add(k)
            out.append(f)
    return out


# -- construction ------------------------------------------------------------


def _default_names(n: int) -> tuple[str, ...]:
    return tuple(f"X{i + 1}" for i in range(n))


def elemental_inequalities(space: EntropyCoordinateSpace) -> list[LinForm]:
    """Monotonicity H([n]) - H([n]\\{i}) >= 0, then I(i:j|K) >= 0 for i < j."""
    n = space.n
    full = (1 << n) - 1
    dim = space.dim
    out = []

    def form(terms):
        coeffs = [Fraction(0)] * dim
        for mask, c in terms:
            if mask:
                coeffs[mask - 1] += c
        return LinForm(space, tuple(coeffs))

    for i in range(n):
        out.append(form([(full, 1), (full ^ (1 << i), -1)]))
    for i in range(n):
        for j in range(i + 1, n):
            rest = [k for k in range(n) if k not in (i, j)]
            for r in range(len(rest) + 1):
                for combo in itertools.combinations(rest, r):
                    k = sum(1 << b for b in combo)
                    a, b = 1 << i, 1 << j
                    out.append(form([(a | k, 1), (b | k, 1), (a | b | k, -1), (k, -1)]))
    # order submodularity by (i, j, K-mask) for a stable layout
    mono, sub = out[:n], out[n:]
    return mono + sub


def shannon_cone(n_or_names, aux: Sequence[str] = ()) -> Cone:
    """Elemental Shannon cone: ``n`` monotonicity and ``C(n,2) 2^(n-2)``
    submodularity inequalities; H(empty) = 0 by omission of that coordinate."""
    if isinstance(n_or_names, int):
        names = _default_names(n_or_names)
    else:
        names = tuple(n_or_names)
    if not 1 <= len(names) <= MAX_SHANNON_VARIABLES:
        raise CapacityError(f"Shannon cone supports 1..{MAX_SHANNON_VARIABLES} variables, got {len(names)}")
    space = EntropyCoordinateSpace(names, tuple(aux))
    return Cone(space, tuple(elemental_inequalities(space)))


def ci_equality(space: EntropyCoordinateSpace, statement) -> LinForm:
    return mi_form(space, statement.a, statement.b, statement.c)


def causal_cone(dag, aux: Sequence[str] = ()) -> Cone:
    """Shannon cone over all DAG nodes plus source independence (when there
    are at least two latent roots) and every local Markov statement as I = 0."""
    from . import causal_graphs as cg

    names = tuple(dag.names)
    base = shannon_cone(names, aux)
    eqs = []
    if len(cg.latent_roots(dag)) >= 2:
        eqs.append(cg.source_independence_constraint(dag, space=base.space))
    for st in cg.local_markov_constraints(dag):
        eqs.append(ci_equality(base.space, st))
    return base.with_constraints(equalities=eqs)


# -- optimization -------------------------------------------------------------


@dataclass
class Certificate:
    """``candidate = sum(y_i * ineq_i) + sum(z_j * eq_j) + slack`` with
    ``y >= 0`` and ``slack >= 0`` a constant."""

    inequality_multipliers: dict[int, Fraction]
    equality_multipliers: dict[int, Fraction]
    slack: Fraction

    def residual(self, cone: Cone, candidate: LinForm) -> LinForm:
        total = LinForm.zero(cone.space)
        for i, y in self.inequality_multipliers.items():
            total = total + cone.inequalities[i] * y
        for j, z in self.equality_multipliers.items():
            total = total + cone.equalities[j] * z
        return candidate - total

    def verify(self, cone: Cone, candidate: LinForm) -> bool:
        if any(y < 0 for y in self.inequality_multipliers.values()) or self.slack < 0:
            return False
        r = self.residual(cone, candidate)
        return r.is_constant() and r.const == self.slack


@dataclass
class MaxResult:
    optimum: Fraction | None
    unbounded: bool
    certificate: Certificate | None = None
    pivots: int = 0

    def __str__(self):
        return "unbounded" if self.unbounded else str(self.optimum)


def _minimize(cone: Cone, objective: LinForm, max_pivots=None):
    """Return (min value or None if -inf, certificate, pivots)."""
    if objective.space != cone.space:
        raise ValueError("objective lives in a different coordinate space")
    rows = sorted(set(cone.used_columns()) | set(objective.support()))
    row_of = {c: i for i, c in enumerate(rows)}
    columns, cost, tags = [], [], []
    for i, f in enumerate(cone.inequalities):
        columns.append({row_of[c]: f.coeffs[c] for c in f.support()})
        cost.append(f.const)
        tags.append(("y", i, 1))
    for j, g in enumerate(cone.equalities):
        col = {row_of[c]: g.coeffs[c] for c in g.support()}
        columns.append(col)
        cost.append(g.const)
        tags.append(("z", j, 1))
        columns.append({r: -v for r, v in col.items()})
        cost.append(-g.const)
        tags.append(("z", j, -1))
    rhs = [objective.coeffs[c] for c in rows]
    res = simplex.solve(columns, rhs, cost, max_pivots=max_pivots)
    if res.status == "infeasible":
        return None, None, res.pivots
    if res.status == "unbounded":
        raise ValueError("constraint system is infeasible (dual LP unbounded)")
    ys: dict[int, Fraction] = {}
    zs: dict[int, Fraction] = {}
    for (kind, idx, sign), w in zip(tags, res.x):
        if not w:
            continue
        if kind == "y":
            ys[idx] = ys.get(idx, Fraction(0)) + w
        else:
            zs[idx] = zs.get(idx, Fraction(0)) + sign * w
    zs = {k: v for k, v in zs.items() if v}
    minimum = objective.const - res.value
    cert = Certificate(ys, zs, minimum)
    return minimum, cert, res.pivots


def maximize(cone: Cone, objective: LinForm, max_pivots=None) -> MaxResult:
    """Exact maximum of ``objective`` over the cone, or the unbounded flag.

    When bounded, the certificate expresses ``optimum - objective`` as a
    nonnegative combination of the constraints (slack 0).
    """
    minimum, cert, pivots = _minimize(cone, -objective, max_pivots)
    if minimum is None:
        return MaxResult(None, True, None, pivots)
    cert = Certificate(cert.inequality_multipliers, cert.equality_multipliers, Fraction(0))
    return MaxResult(-minimum, False, cert, pivots)


@dataclass
class Implication:
    implied: bool
    minimum: Fraction | None
    certificate: Certificate | None

    def __bool__(self):
        return self.implied


def is_implied(cone: Cone, candidate: LinForm, max_pivots=None) -> Implication:
    """Whether ``candidate >= 0`` holds on the whole cone, with dual multipliers."""
    minimum, cert, _ = _minimize(cone, candidate, max_pivots)
    if minimum is None:
        return Implication(False, None, None)
    return Implication(minimum >= 0, minimum, cert if minimum >= 0 else None)


# -- redundancy removal and elimination -------------------------------------


def remove_redundant(cone: Cone, deadline: float | None = None) -> Cone:
    """Drop inequalities implied by the remaining ones, scanning in order.

    ``deadline`` is a ``time.monotonic()`` value; once it passes, the scan
    stops and raises :class:`EliminationAborted`.
    """
    kept = [f for f in cone.inequalities if not (f.is_constant() and f.const >= 0)]
    i = 0
    while i < len(kept):
        if deadline is not None and time.monotonic() > deadline:
            raise EliminationAborted("time budget exhausted during redundancy removal",
                                     {"remaining_to_scan": len(kept) - i, "inequalities": len(kept)})
        others = Cone._raw(cone.space, kept[:i] + kept[i + 1:], cone.equalities)
        if is_implied(others, kept[i]):
            del kept[i]
        else:
            i += 1
    return Cone._raw(cone.space, kept, cone.equalities)


# int-row representation: tuple of coefficients + constant (last entry)


def _to_row(f: LinForm, equality=False) -> tuple[int, ...]:
    coeffs, const = _canonical_ints(f.coeffs, f.const, equality)
    return coeffs + (const,)


def _from_row(space, row) -> LinForm:
    return LinForm(space, tuple(Fraction(v) for v in row[:-1]), Fraction(row[-1]))


def _norm(row, equality=False) -> tuple[int, ...]:
    g = 0
    for v in row:
        if v:
            g = math.gcd(g, v)
    if g > 1:
        row = tuple(v // g for v in row)
    if equality:
        lead = next((v for v in row if v), 0)
        if lead < 0:
            row = tuple(-v for v in row)
    return tuple(row)


def _combine(p, n, k):
    """Nonnegative combination cancelling column k (p[k] > 0 > n[k])."""
    a, b = p[k], -n[k]
    return _norm(tuple(b * x + a * y for x, y in zip(p, n)))


def _substitute(row, eq, k, equality=False):
    """Remove column k from ``row`` using equality ``eq`` (eq[k] != 0)."""
    c = row[k]
    if not c:
        return row
    e = eq[k]
    if e > 0:
        out = tuple(e * x - c * y for x, y in zip(row, eq))
    else:
        out = tuple(-e * x + c * y for x, y in zip(row, eq))
    return _norm(out, equality)


def _is_trivial(row) -> bool:
    return not any(row[:-1]) and row[-1] >= 0


def _eliminate_rows(ineqs, eqs, k):
    """One FM / substitution step on int rows; returns (ineqs, eqs, used_substitution)."""
    pivot = None
    for e in eqs:
        if e[k] and (pivot is None or sum(1 for v in e if v) < sum(1 for v in pivot if v)):
            pivot = e
    if pivot is not None:
        new_eqs = [_substitute(e, pivot, k, True) for e in eqs if e is not pivot]
        new_ineqs = [_substitute(f, pivot, k) for f in ineqs]
        return new_ineqs, new_eqs, True
    pos = [f for f in ineqs if f[k] > 0]
    neg = [f for f in ineqs if f[k] < 0]
    out = [f for f in ineqs if not f[k]]
    for p in pos:
        for n in neg:
            out.append(_combine(p, n, k))
    return out, list(eqs), False


def _clean(space, ineqs, eqs) -> Cone:
    seen, kept = set(), []
    for f in ineqs:
        if _is_trivial(f) or f in seen:
            continue
        seen.add(f)
        kept.append(f)
    seen_e, kept_e = set(), []
    for e in eqs:
        if not any(e) or e in seen_e:
            continue
        seen_e.add(e)
        kept_e.append(e)
    return Cone._raw(space, [_from_row(space, f) for f in kept], [_from_row(space, e) for e in kept_e])


def fm_eliminate(cone: Cone, coordinate, reduce: bool = True) -> Cone:
    """Project out one coordinate (column index, subset, or aux name).

    Equalities containing the coordinate are used for exact substitution;
    otherwise positive/negative inequality pairs are combined. The result is
    canonicalized, deduplicated and (by default) reduced by
    :func:`remove_redundant`. The coordinate keeps its column but no longer
    appears in any constraint.
    """
    k = coordinate if isinstance(coordinate, int) else cone.space.column(coordinate)
    ineqs = [_to_row(f) for f in cone.inequalities]
    eqs = [_to_row(g, True) for g in cone.equalities]
    ineqs, eqs, _ = _eliminate_rows(ineqs, eqs, k)
    out = _clean(cone.space, ineqs, eqs)
    return remove_redundant(out) if reduce else out


def elimination_cost(cone: Cone, k: int) -> int:
    if any(g.coeffs[k] for g in cone.equalities):
        return -1
    pos = sum(1 for f in cone.inequalities if f.coeffs[k] > 0)
    neg = sum(1 for f in cone.inequalities if f.coeffs[k] < 0)
    return pos * neg


def project(
    cone: Cone,
    keep: Iterable,
    max_inequalities: int = 200_000,
    progress=None,
    time_budget: float | None = None,
) -> Cone:
    """Eliminate every used coordinate not in ``keep``.

    Coordinates are taken in order of increasing ``#pos * #neg`` (equality
    substitutions first, ties to the lowest column). Redundancy removal runs
    after each step. Raises :class:`EliminationAborted` when an intermediate
    system exceeds ``max_inequalities`` or the wall-clock ``time_budget``.
    """
    space = cone.space
    keep_cols = {k if isinstance(k, int) else space.column(k) for k in keep}
    start = time.monotonic()
    steps = []
    current = cone
    while True:
        todo = [c for c in current.used_columns() if c not in keep_cols]
        if not todo:
            return current
        k = min(todo, key=lambda c: (elimination_cost(current, c), c))
        cost = elimination_cost(current, k)
        if cost > max_inequalities:
            raise EliminationAborted(
                f"eliminating {space.pretty(k)} would create {cost} inequalities",
                {"eliminated": steps, "remaining": len(todo), "inequalities": len(current)},
            )
        current = fm_eliminate(current, k, reduce=False)
        if len(current) > max_inequalities:
            raise EliminationAborted(
                f"{len(current)} inequalities after eliminating {space.pretty(k)}",
                {"eliminated": steps, "remaining": len(todo) - 1, "inequalities": len(current)},
            )
        deadline = None if time_budget is None else start + time_budget
        try:
            current = remove_redundant(current, deadline)
        except EliminationAborted as e:
            raise EliminationAborted(
                f"time budget of {time_budget}s exhausted while reducing after {space.pretty(k)}",
                {"eliminated": steps, "remaining": len(todo) - 1, **e.progress},
            ) from None
        steps.append(space.pretty(k))
        if progress is not None:
            progress(space.pretty(k), len(todo) - 1, len(current))
        if time_budget is not None and time.monotonic() - start > time_budget:
            raise EliminationAborted(
                f"time budget of {time_budget}s exhausted",
                {"eliminated": steps, "remaining": len(todo) - 1, "inequalities": len(current)},
            )


# -- serialization ------------------------------------------------------------


def _constraint_dict(f: LinForm, rel: str) -> dict:
    return {"coeffs": {k: str(v) for k, v in f.terms().items()}, "rel": rel, "rhs": str(-f.const)}


def cone_to_json(cone: Cone, **kwargs) -> str:
    items = [_constraint_dict(f, ">=") for f in cone.inequalities]
    items += [_constraint_dict(g, "=") for g in cone.equalities]
    return json.dumps(items, **kwargs)


def cone_from_json(text: str, space: EntropyCoordinateSpace) -> Cone:
    ineqs, eqs = [], []
    for item in json.loads(text):
        f = LinForm.build(space, {k: Fraction(v) for k, v in item["coeffs"].items()}, -Fraction(item["rhs"]))
        rel = item["rel"]
        if rel == ">=":
            ineqs.append(f)
        elif rel == "<=":
            ineqs.append(-f)
        elif rel in ("=", "=="):
            eqs.append(f)
        else:
            raise ValueError(f"unknown relation {rel!r}")
    return Cone(space, tuple(ineqs), tuple(eqs))
