"""Measurement-dependence bounds from Bell violations and from observed data.

Lower bounds say how much dependence between the settings and the source is
needed to explain a given Bell value. Upper bounds (Theta and H(inputs|R))
say how much dependence the data with an auxiliary variable R allow. When the
lower bound exceeds the upper bound, no measurement-dependent classical model
explains the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bell import Behavior, cglmp, chsh
from .causal_graphs import merge_variables
from .errors import ShapeError
from .probtab import Distribution, binary_entropy, entropy, marginal, mutual_information, tripartite_information

LOG2E = math.log2(math.e)
LOG2_3 = math.log2(3)
VERDICT_TOL = 1e-9

NONCLASSICAL = "nonclassical"
CLASSICAL = "classical-explainable"
INCONCLUSIVE = "inconclusive"


PINSKER_FACTORS = {"standard": 2.0, "printed": 1.0}


def pinsker_mi_to_l1(i_bits: float, convention: str = "standard") -> float:
    """Largest L1 measure M compatible with mutual information I (bits).

    Pinsker's inequality for the full L1 distance reads M^2 <= 2 I / log2 e
    ("standard"). The "printed" convention M^2 <= I / log2 e is tighter than
    Pinsker allows: X = Lambda a fair bit has M = 1 and I = 1.
    """
    if i_bits < 0:
        if i_bits > -1e-12:
            i_bits = 0.0
        else:
            raise ValueError(f"mutual information must be non-negative, got {i_bits}")
    try:
        factor = PINSKER_FACTORS[convention]
    except KeyError:
        raise ValueError(f"unknown Pinsker convention {convention!r}; choose from {sorted(PINSKER_FACTORS)}") from None
    return math.sqrt(factor * i_bits / LOG2E)


def chsh_l1_lower(value: float) -> float:
    return max(0.0, (value - 2) / 4)


def chsh_mi_lower(value: float) -> float:
    """2 - h((4 - CHSH)/8) - ((4 + CHSH)/8) log2 3, clamped to 0 for CHSH <= 2."""
    if value <= 2:
        return 0.0
    value = min(value, 4.0)
    return max(0.0, 2 - binary_entropy((4 - value) / 8) - (4 + value) / 8 * LOG2_3)


def cglmp_l1_lower(value: float) -> float:
    return max(0.0, (value - 2) / 4)


MERMIN_MODES = ("uniform-8", "odd-4")


def mermin_mi_lower(value: float, mode: str = "uniform-8") -> float:
    """Least I(X,Y,Z:Lambda) reproducing a Mermin value M.

    uniform-8: 1 - h((4 - M)/8)/2 - ((4 + M)/16) log2 3 (inputs uniform over
    all eight cells). odd-4: 2 - h((4 - M)/8) - ((4 + M)/8) log2 3 (inputs
    uniform over the four cells with x + y + z odd).
    """
    if mode not in MERMIN_MODES:
        raise ValueError(f"unknown Mermin input mode {mode!r}; choose from {MERMIN_MODES}")
    if value <= 2:
        return 0.0
    value = min(value, 4.0)
    p = (4 - value) / 8
    if mode == "uniform-8":
        out = 1 - binary_entropy(p) / 2 - (4 + value) / 16 * LOG2_3
    else:
        out = 2 - binary_entropy(p) - (4 + value) / 8 * LOG2_3
    return max(0.0, out)


# -- upper bounds from data ---------------------------------------------------


def _with_r(dist: Distribution, inputs: Sequence[str], r) -> tuple[Distribution, str]:
    """Marginal over inputs and R, merging a composite R into one variable."""
    if isinstance(r, str):
        members = [r]
        name = r
    else:
        members = list(r)
        name = "R"
        if name in inputs or (name in dist.names and name not in members):
            name = "_".join(members)
    names = list(inputs) + members
    missing = [n for n in names if n not in dist.names]
    if missing:
        raise ShapeError(f"distribution lacks variables {missing}; has {list(dist.names)}")
    d = marginal(dist, names)
    if len(members) > 1:
        d = merge_variables(d, [(name, members)])
    return d, name


THETA_LABELS = (
    "H(X,Y|R)",
    "H(X,Y) - I(X:Y:R) - I(X:R) - I(Y:R)",
    "H(X,Y) + H(R) - 2I(X:Y:R) - 2I(X:R) - 2I(Y:R)",
)


def theta_terms(dist: Distribution, x="X", y="Y", r="R") -> tuple[float, float, float]:
    """The three expressions whose minimum is Theta(X, Y, R)."""
    d, rn = _with_r(dist, [x, y], r)
    hxy = entropy(d, [x, y])
    hr = entropy(d, [rn])
    i3 = tripartite_information(d, [x], [y], [rn])
    ixr = mutual_information(d, [x], [rn])
    iyr = mutual_information(d, [y], [rn])
    return (
        entropy(d, [x, y, rn]) - hr,
        hxy - i3 - ixr - iyr,
        hxy + hr - 2 * i3 - 2 * ixr - 2 * iyr,
    )


def theta(dist: Distribution, x="X", y="Y", r="R") -> tuple[float, int, str]:
    """(Theta, index 1..3 of the minimising expression, its label).

    Ties go to the lowest index. ``r`` may be a list of variables, which are
    merged into one.
    """
    terms = theta_terms(dist, x, y, r)
    k = int(np.argmin(terms))
    return float(terms[k]), k + 1, THETA_LABELS[k]


def h_inputs_given_r(dist: Distribution, inputs: Sequence[str] = ("X", "Y"), r="R") -> float:
    d, rn = _with_r(dist, list(inputs), r)
    return max(0.0, entropy(d, list(inputs) + [rn]) - entropy(d, [rn]))


# -- verdicts -----------------------------------------------------------------


@dataclass
class MdReport:
    lower_bound: float
    upper_bound: float
    verdict: str
    unit: str = "bits"
    components: dict = field(default_factory=dict)

    @classmethod
    def from_bounds(cls, lower: float, upper: float, unit: str = "bits", components=None,
                    tol: float = VERDICT_TOL) -> "MdReport":
        if lower > upper + tol:
            verdict = NONCLASSICAL
        elif lower <= tol:
            verdict = CLASSICAL
        else:
            verdict = INCONCLUSIVE
        return cls(float(lower), float(upper), verdict, unit, dict(components or {}))

    @property
    def lower_bound_bits(self) -> float:
        return self.lower_bound

    @property
    def upper_bound_bits(self) -> float:
        return self.upper_bound

    def to_dict(self) -> dict:
        return {
            "lower": self.lower_bound,
            "upper": self.upper_bound,
            "unit": self.unit,
            "verdict": self.verdict,
            "components": {k: (float(v) if isinstance(v, (float, np.floating)) else v)
                           for k, v in self.components.items()},
        }


def _check_chsh_shape(behavior: Behavior):
    if behavior.input_shape != (2, 2) or behavior.output_shape != (2, 2):
        raise ShapeError(f"CHSH needs a 2x2x2x2 behavior, got {behavior!r}")


def check_chsh_mi(behavior: Behavior, md_dist: Distribution, r="R") -> MdReport:
    """CHSH-derived lower bound on I(X,Y:Lambda) against Theta."""
    _check_chsh_shape(behavior)
    value = chsh(behavior)
    th, k, label = theta(md_dist, r=r)
    return MdReport.from_bounds(chsh_mi_lower(value), th, "bits",
                                {"chsh": value, "theta": th, "theta_term": k, "theta_label": label})


def check_chsh_l1(behavior: Behavior, md_dist: Distribution, r="R", convention: str = "standard") -> MdReport:
    """(CHSH - 2)/4 against the Pinsker image of Theta."""
    _check_chsh_shape(behavior)
    value = chsh(behavior)
    th, k, label = theta(md_dist, r=r)
    return MdReport.from_bounds(chsh_l1_lower(value), pinsker_mi_to_l1(th, convention), "l1",
                                {"chsh": value, "theta": th, "theta_term": k, "theta_label": label})


def check_cglmp(behavior: Behavior, d: int, md_dist: Distribution, r="R", convention: str = "standard") -> MdReport:
    value = cglmp(behavior, d)
    th, k, label = theta(md_dist, r=r)
    return MdReport.from_bounds(cglmp_l1_lower(value), pinsker_mi_to_l1(th, convention), "l1",
                                {"cglmp": value, "d": d, "theta": th, "theta_term": k})


@dataclass(frozen=True)
class LowerFormula:
    func: Callable[[float], float]
    unit: str  # "bits": compared with H(inputs|R); "l1": compared after Pinsker


FORMULAS: dict[str, LowerFormula] = {
    "chsh-mi": LowerFormula(chsh_mi_lower, "bits"),
    "chsh-l1": LowerFormula(chsh_l1_lower, "l1"),
    "cglmp-l1": LowerFormula(cglmp_l1_lower, "l1"),
    "mermin-uniform8": LowerFormula(lambda m: mermin_mi_lower(m, "uniform-8"), "bits"),
    "mermin-odd4": LowerFormula(lambda m: mermin_mi_lower(m, "odd-4"), "bits"),
}


def check_generic(bell_value: float, f_lower: str, md_dist: Distribution | None, inputs: Sequence[str],
                  r="R", h_cond: float | None = None, convention: str = "standard") -> MdReport:
    """Registered lower-bound formula against H(inputs|R).

    Mutual-information formulas compare in bits; L1 formulas compare against
    the Pinsker image of H(inputs|R). ``h_cond`` overrides the value computed from
    ``md_dist``.
    """
    try:
        formula = FORMULAS[f_lower]
    except KeyError:
        raise ValueError(f"unknown lower-bound formula {f_lower!r}; choose from {sorted(FORMULAS)}") from None
    if h_cond is None:
        if md_dist is None:
            raise ValueError("need md_dist or h_cond")
        h_cond = h_inputs_given_r(md_dist, inputs, r)
    lower = formula.func(bell_value)
    upper = h_cond if formula.unit == "bits" else pinsker_mi_to_l1(h_cond, convention)
    return MdReport.from_bounds(lower, upper, formula.unit,
                                {"bell_value": bell_value, "formula": f_lower, "h_inputs_given_r": h_cond})


# -- comparison curves ------------------------------------------------------

FIG7_HEADER = "ratio,chsh_mi_lower,mermin_mi_lower"
FIG7_MAX_RATIO = 1 - 1 / math.sqrt(2)


def figure7_curves(resolution: int = 101) -> list[tuple[float, float, float]]:
    """(ratio, CHSH bound, Mermin bound) with CHSH = 2 + 2 sqrt(2) ratio and
    M = 2 + 4 ratio, over the ratios both inequalities reach quantumly."""
    if int(resolution) != resolution or resolution < 2:
        raise ValueError("resolution must be an integer >= 2")
    rows = []
    for ratio in np.linspace(0.0, FIG7_MAX_RATIO, int(resolution)):
        ratio = float(ratio)
        rows.append((ratio, chsh_mi_lower(2 + 2 * math.sqrt(2) * ratio), mermin_mi_lower(2 + 4 * ratio)))
    return rows


def figure7_csv(resolution: int = 101) -> str:
    lines = [FIG7_HEADER] + [f"{a:.9f},{b:.9f},{c:.9f}" for a, b, c in figure7_curves(resolution)]
    return "\n".join(lines) + "\n"
