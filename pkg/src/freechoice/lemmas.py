"""Exact checks of the entropic measurement-dependence bounds.

The working cone is the causal Shannon cone of the six-variable structure
{X, Y, R, Ux, Uy, Lambda} (outcomes omitted) with an auxiliary coordinate
``t`` pinned to I(X,Y : Lambda) by an equality.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import causal_graphs as cg
from .cones import Cone, causal_cone, is_implied, maximize, project, shannon_cone
from .forms import (
    LinForm,
    aux_form,
    conditional_entropy_form,
    entropy_form,
    mi_form,
    tripartite_form,
)

T = "t"


def md_cone() -> Cone:
    """Causal cone of the auxiliary-R Bell structure plus ``t = I(X,Y:Lambda)``."""
    cone = causal_cone(cg.bell_md_aux(outcomes=False), aux=(T,))
    s = cone.space
    pin = aux_form(s, T) - mi_form(s, ("X", "Y"), ("Lambda",))
    return cone.with_constraints(equalities=[pin])


def theta_forms(space) -> list[tuple[str, LinForm]]:
    """The three upper-bound expressions on I(X,Y:Lambda), as linear forms."""
    hxy = entropy_form(space, ("X", "Y"))
    i3 = tripartite_form(space, "X", "Y", "R")
    ixr = mi_form(space, "X", "R")
    iyr = mi_form(space, "Y", "R")
    return [
        ("H(X,Y|R)", conditional_entropy_form(space, ("X", "Y"), ("R",))),
        ("H(X,Y) - I(X:Y:R) - I(X:R) - I(Y:R)", hxy - i3 - ixr - iyr),
        ("H(X,Y) + H(R) - 2I(X:Y:R) - 2I(X:R) - 2I(Y:R)",
         hxy + entropy_form(space, "R") - 2 * i3 - 2 * ixr - 2 * iyr),
    ]


@dataclass
class CheckLine:
    name: str
    passed: bool
    detail: str = ""

    def __str__(self):
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'}" + (f" ({self.detail})" if self.detail else "")


@dataclass
class Report:
    title: str
    lines: list[CheckLine] = field(default_factory=list)
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(line.passed for line in self.lines)

    def render(self) -> str:
        return "\n".join([f"# {self.title}"] + [str(x) for x in self.lines])


def verify_lemma1_bounds(cone: Cone | None = None) -> Report:
    """Maximize ``t - bound`` for each of the three expressions; each optimum must be exactly 0."""
    start = time.monotonic()
    cone = cone or md_cone()
    t = aux_form(cone.space, T)
    report = Report("lemma1")
    for k, (label, form) in enumerate(theta_forms(cone.space), 1):
        res = maximize(cone, t - form)
        ok = not res.unbounded and res.optimum == 0
        ok = ok and res.certificate.verify(cone, -(t - form))
        report.lines.append(CheckLine(f"bound {k} optimum 0/1 exact", ok, f"t <= {label}; optimum {res}"))
        report.data[f"bound{k}"] = res
    report.seconds = time.monotonic() - start
    return report


def exhibit_point(cone: Cone, assignment) -> list[Fraction]:
    """Entropy point where H(S) = number of 'fair bits' in S (rational, exact).

    ``assignment`` maps each variable to the set of independent uniform bits
    it is a function of (e.g. ``{"X": {0}, "Ux": {0}}``); ``t`` is filled in
    from its defining mutual information.
    """
    s = cone.space
    point = [Fraction(0)] * s.dim
    for mask in range(1, 1 << s.n):
        bits = set()
        for name in s.subset(mask):
            bits |= set(assignment.get(name, ()))
        point[mask - 1] = Fraction(len(bits))
    if T in s.aux:
        hx = lambda names: len(set().union(*(assignment.get(n, set()) for n in names)))  # noqa: E731
        point[s.column(T)] = Fraction(hx(("X", "Y")) + hx(("Lambda",)) - hx(("X", "Y", "Lambda")))
    return point


def verify_mi_lower_bound(cone: Cone | None = None) -> Report:
    """I(X:Y) <= t is implied (with certificate); 0 <= t too; H(X) <= t is not."""
    start = time.monotonic()
    cone = cone or md_cone()
    s = cone.space
    t = aux_form(s, T)
    report = Report("mi-lower")
    cand = t - mi_form(s, "X", "Y")
    imp = is_implied(cone, cand)
    ok = imp.implied and imp.certificate.verify(cone, cand)
    report.lines.append(CheckLine("I(X:Y) <= I(X,Y:Lambda) implied", ok,
                                  f"{len(imp.certificate.inequality_multipliers) if imp.certificate else 0} multipliers"))
    report.data["mi_lower"] = imp
    imp0 = is_implied(cone, t)
    report.lines.append(CheckLine("0 <= t implied", imp0.implied))
    false_cand = t - entropy_form(s, "X")
    imp_false = is_implied(cone, false_cand)
    # X = Ux a fair bit, everything else constant: feasible, t = 0 < H(X) = 1
    point = exhibit_point(cone, {"X": {0}, "Ux": {0}, "R": {0}})
    witness = cone.contains(point) and false_cand.evaluate(point) < 0
    report.lines.append(CheckLine("H(X) <= t not implied", not imp_false.implied and witness,
                                  "witness point violates it"))
    report.seconds = time.monotonic() - start
    return report


def lemma2_step_form(cone: Cone) -> LinForm:
    s = cone.space
    h = lambda *names: entropy_form(s, names)  # noqa: E731
    return h("X", "Lambda") + h("X", "R") - h("R", "Lambda") - h("X")


def verify_lemma2() -> Report:
    """The Shannon step H(X,L) + H(X,R) - H(R,L) - H(X) >= 0 over the 3-variable
    cone, and the resulting bound I(X:L) <= H(X|R) once I(R:L) = 0."""
    start = time.monotonic()
    report = Report("lemma2")
    cone = shannon_cone(("X", "R", "Lambda"))
    step = lemma2_step_form(cone)
    imp = is_implied(cone, step)
    report.lines.append(CheckLine("Shannon step implied", imp.implied and imp.certificate.verify(cone, step)))
    s = cone.space
    with_indep = cone.with_constraints(equalities=[mi_form(s, "R", "Lambda")])
    bound = conditional_entropy_form(s, "X", "R") - mi_form(s, "X", "Lambda")
    imp2 = is_implied(with_indep, bound)
    report.lines.append(CheckLine("I(X:Lambda) <= H(X|R) given R indep. Lambda", imp2.implied))
    imp3 = is_implied(cone, bound)
    report.lines.append(CheckLine("bound needs the independence assumption", not imp3.implied))
    report.seconds = time.monotonic() - start
    return report


def derive_md_upper_bounds(max_inequalities: int = 200_000, time_budget: float | None = None,
                           progress=None) -> Cone:
    """Project the cone onto the entropies of subsets of {X, Y, R} and ``t``.

    Long-running; raises :class:`~freechoice.errors.EliminationAborted` past the
    inequality ceiling or the time budget.
    """
    cone = md_cone()
    s = cone.space
    keep = [s.column(sub) for sub in _subsets(("X", "Y", "R"))] + [s.column(T)]
    return project(cone, keep, max_inequalities=max_inequalities, time_budget=time_budget, progress=progress)


def _subsets(names):
    out = []
    for mask in range(1, 1 << len(names)):
        out.append(tuple(n for i, n in enumerate(names) if mask >> i & 1))
    return out


def check_derived(derived: Cone) -> Report:
    """Which known bounds the projected system implies (evaluated in the full space)."""
    s = derived.space
    t = aux_form(s, T)
    report = Report("derived cone")
    for k, (label, form) in enumerate(theta_forms(s), 1):
        report.lines.append(CheckLine(f"implies t <= {label}", is_implied(derived, form - t).implied))
    report.lines.append(CheckLine("implies t >= I(X:Y)", is_implied(derived, t - mi_form(s, "X", "Y")).implied))
    report.lines.append(CheckLine("implies t >= 0", is_implied(derived, t).implied))
    upper = [f for f in derived.inequalities if f.coeffs[s.column(T)] < 0]
    report.data["upper_bounds_on_t"] = upper
    report.data["n_inequalities"] = len(derived)
    return report
