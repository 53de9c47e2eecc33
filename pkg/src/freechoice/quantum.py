"""Small dense quantum simulator: states, POVMs, the Born rule over networks
of sources, and the concrete behaviors used in the examples (the Fritz
triangle distribution, GHZ/Mermin, and entanglement swapping for
bilocality)."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .bell import Behavior, behavior_from_distribution, chsh
from .causal_graphs import merge_variables, split_variable
from .errors import CapacityError
from .probtab import Distribution, binary_entropy

MAX_DIM = 2 ** 10
HERM_TOL = 1e-10
PSD_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def kron(*ops) -> np.ndarray:
    """Tensor product in the listed order. Accepts arrays or DensityMatrix."""
    if len(ops) == 1 and isinstance(ops[0], (list, tuple)):
        ops = tuple(ops[0])
    mats = [o.matrix if isinstance(o, DensityMatrix) else np.asarray(o, dtype=complex) for o in ops]
    dim = math.prod(m.shape[0] for m in mats)
    if dim > MAX_DIM:
        raise CapacityError(f"tensor product dimension {dim} exceeds {MAX_DIM}")
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def _is_psd(m: np.ndarray, tol: float = PSD_TOL) -> bool:
    return bool(np.linalg.eigvalsh(m).min() >= -tol)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if m.shape[0] > MAX_DIM:
            raise CapacityError(f"dimension {m.shape[0]} exceeds {MAX_DIM}")
        if np.max(np.abs(m - m.conj().T)) > HERM_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > HERM_TOL:
            raise ValueError(f"density matrix has trace {np.trace(m).real:.12g}")
        if not _is_psd(m):
            raise ValueError("density matrix is not positive semidefinite")
        dims = tuple(self.dims) or (m.shape[0],)
        if math.prod(dims) != m.shape[0]:
            raise ValueError(f"subsystem dims {dims} do not multiply to {m.shape[0]}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, psi, dims=()) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims)

    @classmethod
    def maximally_mixed(cls, dim: int, dims=()) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim, dims)


@dataclass(frozen=True)
class Povm:
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        els = tuple(np.array(e, dtype=complex) for e in self.elements)
        if not els:
            raise ValueError("POVM needs at least one element")
        d = els[0].shape[0]
        for e in els:
            if e.shape != (d, d):
                raise ValueError("POVM elements must share one square shape")
            if np.max(np.abs(e - e.conj().T)) > HERM_TOL or not _is_psd(e):
                raise ValueError("POVM element is not positive semidefinite")
        if np.max(np.abs(sum(els) - np.eye(d))) > HERM_TOL:
            raise ValueError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    @classmethod
    def projective(cls, observable) -> "Povm":
        """Two-outcome measurement of a +/-1 observable; outcome a <-> eigenvalue (-1)^a."""
        o = np.asarray(observable, dtype=complex)
        eye = np.eye(o.shape[0])
        return cls(((eye + o) / 2, (eye - o) / 2))

    @classmethod
    def computational(cls, dim: int = 2) -> "Povm":
        return cls(tuple(np.diag(np.eye(dim)[i]).astype(complex) for i in range(dim)))

    @classmethod
    def product(cls, *povms: "Povm") -> "Povm":
        """Joint measurement; outcome index is mixed radix, first factor most significant."""
        return cls(tuple(kron(*els) for els in itertools.product(*(p.elements for p in povms))))


def born_joint(sources: Sequence[tuple[DensityMatrix, Sequence[str]]], povms: Mapping[str, Povm]) -> Distribution:
    """Joint outcome distribution of a network.

    Each source is a state together with the parties receiving its
    subsystems (one party per subsystem, in order). A party's POVM acts on
    the subsystems it receives, ordered as the sources are listed. The result
    has one variable per party, named after it, in ``povms`` order.
    """
    parties = list(povms)
    subsystems: list[tuple[str, int]] = []
    for state, owners in sources:
        owners = tuple(owners)
        dims = state.dims
        if len(dims) != len(owners):
            if len(dims) == 1 and state.dim == 2 ** len(owners):
                dims = (2,) * len(owners)
            else:
                raise ValueError(f"source with dims {state.dims} cannot feed parties {owners}")
        for o, d in zip(owners, dims):
            if o not in povms:
                raise ValueError(f"party {o!r} receives a subsystem but has no POVM")
            subsystems.append((o, d))
    total = math.prod(d for _, d in subsystems)
    if total > MAX_DIM:
        raise CapacityError(f"network dimension {total} exceeds {MAX_DIM}")
    party_dims = {}
    for p in parties:
        party_dims[p] = math.prod(d for o, d in subsystems if o == p)
        if not any(o == p for o, _ in subsystems):
            raise ValueError(f"party {p!r} receives no subsystem")
        if povms[p].dim != party_dims[p]:
            raise ValueError(f"POVM of {p!r} acts on dimension {povms[p].dim}, party holds {party_dims[p]}")

    rho = kron(*(s for s, _ in sources))
    n = len(subsystems)
    dims = [d for _, d in subsystems]
    order = [i for p in parties for i, (o, _) in enumerate(subsystems) if o == p]
    t = rho.reshape(dims + dims).transpose(order + [n + i for i in order])
    pd = [party_dims[p] for p in parties]
    t = t.reshape(pd + pd)

    # p[o1..ok] = sum rho[i1..ik, j1..jk] * prod E_p[o_p, j_p, i_p]
    letters = iter("abcdefghijklmnopqrstuvwxyz")
    k = len(parties)
    out_l = [next(letters) for _ in range(k)]
    row_l = [next(letters) for _ in range(k)]
    col_l = [next(letters) for _ in range(k)]
    subs = ["".join(row_l + col_l)] + [out_l[i] + col_l[i] + row_l[i] for i in range(k)]
    expr = ",".join(subs) + "->" + "".join(out_l)
    stacks = [np.stack(povms[p].elements) for p in parties]
    probs = np.einsum(expr, t, *stacks).real
    probs[np.abs(probs) < 1e-15] = 0.0
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    return Distribution([(p, len(povms[p])) for p in parties], probs)


PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)


def isotropic_state(v: float, psi=PHI_PLUS) -> DensityMatrix:
    """v |psi><psi| + (1 - v) I/d."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    psi = np.asarray(psi, dtype=complex)
    d = psi.size
    rho = v * np.outer(psi, psi.conj()) + (1 - v) * np.eye(d) / d
    return DensityMatrix(rho, (2,) * int(round(math.log2(d))))


def _setting_povm(observables) -> Povm:
    """Party holding (measured qubit, setting qubit): reads the setting qubit in
    the computational basis and measures the observable it selects.
    Outcome index 2a + x."""
    els = []
    for a in (0, 1):
        for x, obs in enumerate(observables):
            proj_a = (np.eye(2) + (-1) ** a * obs) / 2
            proj_x = np.diag(np.eye(2)[x]).astype(complex)
            els.append(np.kron(proj_a, proj_x))
    return Povm(tuple(els))


FRITZ_A = (SZ, SX)
FRITZ_B = ((SZ + SX) / math.sqrt(2), (SZ - SX) / math.sqrt(2))


def fritz_distribution(v: float = 1.0) -> Distribution:
    """p(a, x, b, y, r0, r1) of the triangle with three visibility-v copies of
    (|00> + |11>)/sqrt(2).

    Sources: rho_AB to (A, B), rho_XR0 to (A, R), rho_YR1 to (B, R). A reads x
    from its rho_XR0 half and measures sigma_z (x=0) or sigma_x (x=1); B reads
    y likewise and measures (sigma_z +/- sigma_x)/sqrt(2); R reads both halves
    in the computational basis.
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    rho = isotropic_state(v)
    joint = born_joint(
        [(rho, ("AX", "BY")), (rho, ("AX", "RR")), (rho, ("BY", "RR"))],
        {"AX": _setting_povm(FRITZ_A), "BY": _setting_povm(FRITZ_B),
         "RR": Povm.product(Povm.computational(), Povm.computational())},
    )
    joint = split_variable(joint, "AX", [("A", 2), ("X", 2)])
    joint = split_variable(joint, "BY", [("B", 2), ("Y", 2)])
    return split_variable(joint, "RR", [("R0", 2), ("R1", 2)])


def fritz_behavior(v: float = 1.0) -> Behavior:
    return behavior_from_distribution(fritz_distribution(v), ("X", "Y"), ("A", "B"))


def fritz_md_distribution(v: float = 1.0) -> Distribution:
    """Marginal over (X, Y, R) with R = (R0, R1) merged."""
    from .probtab import marginal

    d = marginal(fritz_distribution(v), ["X", "Y", "R0", "R1"])
    return merge_variables(d, [("R", ["R0", "R1"])])


def _s(x: float) -> float:
    return 0.0 if x == 0 else x * math.log2(x)


def fritz_theta_paper_formula(v: float) -> float:
    """2 - (s((v-1)^2) + s((v+1)^2) + s(1-v^2))/4 with s(x) = x log2 x, as printed."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    return 2 - (_s((v - 1) ** 2) + _s((v + 1) ** 2) + _s(1 - v ** 2)) / 4


def fritz_theta_distribution(v: float) -> float:
    """Theta evaluated on the Born-rule (X, Y, R) marginal."""
    from .bounds import theta

    return theta(fritz_md_distribution(v))[0]


def fritz_theta_closed_form(v: float) -> float:
    """2 h((1 - v)/2): each setting bit is a noisy copy of its R half."""
    return 2 * binary_entropy((1 - v) / 2)


THETA_SOURCES: dict[str, Callable[[float], float]] = {
    "paper-formula": fritz_theta_paper_formula,
    "distribution": fritz_theta_distribution,
    "zero": lambda v: 0.0,
}


@dataclass
class CriticalVisibility:
    found: bool
    v: float | None
    theta_source: str
    bound: str

    def __str__(self):
        if not self.found:
            return f"critical visibility ({self.theta_source}, {self.bound}): not found"
        return f"critical visibility ({self.theta_source}, {self.bound}): {self.v:.6f}"


def fritz_verdict(v: float, theta_source: str = "distribution", bound: str = "mi",
                  convention: str = "standard") -> str:
    from .bounds import MdReport, chsh_l1_lower, chsh_mi_lower, pinsker_mi_to_l1

    th = THETA_SOURCES[theta_source](v)
    value = 2 * math.sqrt(2) * v
    if bound == "mi":
        return MdReport.from_bounds(chsh_mi_lower(value), th).verdict
    return MdReport.from_bounds(chsh_l1_lower(value), pinsker_mi_to_l1(th, convention)).verdict


def critical_visibility(theta_source: str = "paper-formula", bound: str = "mi", tol: float = 1e-6,
                        convention: str = "standard") -> CriticalVisibility:
    """Smallest v whose (ideal-settings) Fritz data is certified nonclassical.

    The CHSH value of the Fritz conditional is 2 sqrt(2) v; bisection on v
    to ``tol``.
    """
    if theta_source not in THETA_SOURCES:
        raise ValueError(f"unknown theta source {theta_source!r}; choose from {sorted(THETA_SOURCES)}")
    if bound not in ("mi", "l1"):
        raise ValueError(f"bound must be 'mi' or 'l1', got {bound!r}")
    ok = lambda v: fritz_verdict(v, theta_source, bound, convention) == "nonclassical"  # noqa: E731
    if not ok(1.0):
        return CriticalVisibility(False, None, theta_source, bound)
    lo, hi = 0.0, 1.0
    if ok(lo):
        return CriticalVisibility(True, 0.0, theta_source, bound)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return CriticalVisibility(True, hi, theta_source, bound)


SCAN_HEADER = "v,chsh,lower_mi,theta_formula,theta_distribution,verdict"


def scan_fritz(vmin: float = 0.0, vmax: float = 1.0, step: float = 1e-3) -> list[dict]:
    """One row per grid visibility; the verdict uses the distribution-derived Theta."""
    from .bounds import MdReport, chsh_mi_lower

    if not 0.0 <= vmin < vmax <= 1.0:
        raise ValueError("need 0 <= vmin < vmax <= 1")
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(math.floor((vmax - vmin) / step + 1e-9))
    grid = [vmin + i * step for i in range(n + 1)]
    if vmax - grid[-1] > 1e-12:
        grid.append(vmax)
    rows = []
    for v in grid:
        v = round(v, 12)
        value = chsh(fritz_behavior(v))
        lower = chsh_mi_lower(value)
        th_d = fritz_theta_distribution(v)
        rows.append({
            "v": v,
            "chsh": value,
            "lower_mi": lower,
            "theta_formula": fritz_theta_paper_formula(v),
            "theta_distribution": th_d,
            "verdict": MdReport.from_bounds(lower, th_d).verdict,
        })
    return rows


def scan_csv(rows: list[dict], footer: bool = True) -> str:
    lines = [SCAN_HEADER]
    for r in rows:
        lines.append(",".join(f"{r[k]:.9f}" for k in SCAN_HEADER.split(",")[:-1]) + "," + r["verdict"])
    if footer:
        a = critical_visibility("paper-formula", "mi")
        b = critical_visibility("distribution", "mi")
        fmt = lambda c: f"{c.v:.6f}" if c.found else "not-found"  # noqa: E731
        lines.append(f"# critical_visibility paper-formula={fmt(a)} distribution={fmt(b)}")
    return "\n".join(lines) + "\n"


# -- three-party and chain behaviors -------------------------------------------


def _network_behavior(sources, parties, settings) -> Behavior:
    """``settings[p]`` is a list of POVMs for party p (length 1 if inputless).
    Inputs are the parties with more than one setting, in ``parties`` order."""
    with_input = [p for p in parties if len(settings[p]) > 1]
    in_cards = [len(settings[p]) for p in with_input]
    out_cards = [len(settings[p][0]) for p in parties]
    table = np.zeros(tuple(in_cards) + tuple(out_cards))
    for xs in itertools.product(*(range(c) for c in in_cards)):
        choice = dict(zip(with_input, xs))
        povms = {p: settings[p][choice.get(p, 0)] for p in parties}
        table[xs] = born_joint(sources, povms).table
    names_in = [f"X_{p}" for p in with_input]
    return Behavior(list(zip(names_in, in_cards)), list(zip(parties, out_cards)), table)


GHZ_I = np.zeros(8, dtype=complex)
GHZ_I[0], GHZ_I[7] = 1 / math.sqrt(2), 1j / math.sqrt(2)


def ghz_mermin_behavior() -> Behavior:
    """(|000> + i|111>)/sqrt(2) with sigma_x for input 0 and sigma_y for input 1."""
    state = DensityMatrix.pure(GHZ_I, (2, 2, 2))
    obs = [Povm.projective(SX), Povm.projective(SY)]
    b = _network_behavior([(state, ("A", "B", "C"))], ["A", "B", "C"], {p: obs for p in "ABC"})
    return Behavior([("X", 2), ("Y", 2), ("Z", 2)], b.outputs, b.table)


def bell_state_measurement() -> Povm:
    """Outcome 2*b0 + b1 with (-1)^b0 the ZZ eigenvalue and (-1)^b1 the XX eigenvalue."""
    zz, xx = np.kron(SZ, SZ), np.kron(SX, SX)
    eye = np.eye(4)
    els = []
    for b0, b1 in itertools.product((0, 1), repeat=2):
        els.append((eye + (-1) ** b0 * zz) @ (eye + (-1) ** b1 * xx) / 4)
    return Povm(tuple(els))


def bilocality_quantum_behavior(v: float = 1.0) -> Behavior:
    """Entanglement swapping: two Phi+ sources, a Bell-state measurement in the
    middle (split-bit output) and endpoint observables (Z +/- X)/sqrt(2)."""
    rho = isotropic_state(v)
    ends = [Povm.projective((SZ + (-1) ** x * SX) / math.sqrt(2)) for x in (0, 1)]
    b = _network_behavior(
        [(rho, ("A1", "A2")), (rho, ("A2", "A3"))],
        ["A1", "A2", "A3"],
        {"A1": ends, "A2": [bell_state_measurement()], "A3": ends},
    )
    return Behavior([("X1", 2), ("X3", 2)], b.outputs, b.table)
