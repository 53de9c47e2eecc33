"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line (visible in the
pytest output) before asserting.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from freechoice import bell as bf
from freechoice import bounds as bd
from freechoice import causal_graphs as cg
from freechoice import lemmas
from freechoice import oracles as orc
from freechoice import quantum as q
from freechoice.cones import is_implied, shannon_cone
from freechoice.forms import aux_form, mi_form
from freechoice.probtab import Distribution, mutual_information

SQ2 = math.sqrt(2)
# critical visibility when Theta is computed from the simulated distribution
GOLDEN_DISTRIBUTION_VISIBILITY = 0.995643


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else ""))
        return ok

    return _report


def test_criterion_1_upper_bounds_exact(report):
    start = time.monotonic()
    rep = lemmas.verify_lemma1_bounds()
    elapsed = time.monotonic() - start
    optima = [rep.data[f"bound{k}"].optimum for k in (1, 2, 3)]
    ok = rep.passed and all(o == Fraction(0) for o in optima) and elapsed < 60
    report(1, ok, f"optima {optima}, {elapsed:.1f}s")
    assert ok, rep.render()


def test_criterion_2_certificates(report):
    cone = lemmas.md_cone()
    s = cone.space
    cand = aux_form(s, lemmas.T) - mi_form(s, "X", "Y")
    imp = is_implied(cone, cand)
    mi_ok = imp.implied and imp.certificate is not None and imp.certificate.verify(cone, cand)
    c3 = shannon_cone(("X", "R", "Lambda"))
    step = lemmas.lemma2_step_form(c3)
    imp2 = is_implied(c3, step)
    step_ok = imp2.implied and imp2.certificate.verify(c3, step)
    ok = mi_ok and step_ok
    report(2, ok, f"{len(imp.certificate.inequality_multipliers) if imp.certificate else 0} multipliers "
                  f"for I(X:Y) <= t; Shannon step certified: {step_ok}")
    assert ok


def test_criterion_3_formula_checkpoints(report):
    checks = [
        0.0460 <= bd.chsh_mi_lower(2 * SQ2) <= 0.0466,
        abs(bd.chsh_mi_lower(2)) <= 1e-12,
        abs(bd.mermin_mi_lower(2, "uniform-8")) <= 1e-12,
        abs(bd.mermin_mi_lower(4, "uniform-8") - (1 - math.log2(3) / 2)) <= 1e-12,
    ]
    grid = np.linspace(2, 4, 100)
    worst = max(abs(bd.mermin_mi_lower(v, "odd-4") - bd.chsh_mi_lower(v)) for v in grid)
    checks.append(worst <= 1e-12)
    ok = all(checks)
    report(3, ok, f"chsh_mi_lower(2sqrt2) = {bd.chsh_mi_lower(2 * SQ2):.6f}, odd-4 vs CHSH worst {worst:.1e}")
    assert ok


@pytest.mark.parametrize("functional, count", [("chsh", 16), ("mermin", 64), ("cglmp:3", 81)])
def test_criterion_4_classical_maxima(report, functional, count):
    start = time.monotonic()
    best, _ = orc.max_over_deterministic(functional)
    elapsed = time.monotonic() - start
    n = sum(1 for _ in orc.all_strategies(3 if functional == "mermin" else 2, 2,
                                          3 if functional == "cglmp:3" else 2))
    ok = abs(best - 2) <= 1e-12 and n == count and elapsed < 10
    report(4, ok, f"{functional}: max {best:g} over {n} strategies in {elapsed:.2f}s")
    assert ok


def test_criterion_5_fritz(report):
    value = bf.chsh(q.fritz_behavior(1.0))
    paper = q.critical_visibility("paper-formula", "mi")
    dist = q.critical_visibility("distribution", "mi")
    ok = (abs(value - 2 * SQ2) <= 1e-9
          and paper.found and 0.993 <= paper.v <= 0.995
          and dist.found and abs(dist.v - GOLDEN_DISTRIBUTION_VISIBILITY) <= 1e-5)
    report(5, ok, f"chsh {value:.9f}; critical v closed-form {paper.v:.6f}, distribution {dist.v:.6f}")
    assert ok


def test_criterion_6_optimal_mermin_models(report):
    worst_m = worst_i = 0.0
    for mode in ("uniform-8", "odd-4"):
        for m in (2.2, 2.8, 3.4, 4.0):
            model = orc.mermin_optimal_md_model(m, mode)
            beh, _ = orc.behavior_of(model)
            worst_m = max(worst_m, abs(bf.mermin(beh) - m))
            worst_i = max(worst_i, abs(orc.model_mi(model) - bd.mermin_mi_lower(m, mode)))
    ok = worst_m <= 1e-6 and worst_i <= 1e-6
    report(6, ok, f"worst Mermin error {worst_m:.1e}, worst MI error {worst_i:.1e}")
    assert ok


def test_criterion_7_nosignaling_lift(report):
    rng = np.random.default_rng(2024)
    worst_ns = worst_mi = 0.0
    corr_ok = True
    for _ in range(100):
        model = orc.random_md_model(rng, exact=True)
        lifted = orc.lift_model(model)
        for cell in itertools.product((0, 1), repeat=3):
            corr_ok &= orc.exact_correlator(model, cell) == orc.exact_correlator(lifted, cell)
        _, worst = bf.is_no_signaling(orc.nosignaling_lift(model))
        worst_ns = max(worst_ns, worst)
        worst_mi = max(worst_mi, abs(orc.model_mi(model) - orc.model_mi(lifted)))
    ok = bool(corr_ok) and worst_ns < 1e-12 and worst_mi <= 1e-9
    report(7, ok, f"correlators exact: {bool(corr_ok)}, worst signaling {worst_ns:.1e}, worst MI drift {worst_mi:.1e}")
    assert ok


def test_criterion_8_soundness_sweep(report):
    dag = cg.bell_md_aux(outcomes=False)
    worst_theta = worst_h = -math.inf
    for seed in range(1000):
        cards = {"R": 2 + seed % 3, "Lambda": 2 + (seed // 3) % 3, "Ux": 2 + seed % 2, "Uy": 2}
        d = orc.sample_causal_model(dag, cards, seed=seed, keep_latent=True, alpha=0.3 + (seed % 5) / 2)
        i = mutual_information(d, ["X", "Y"], ["Lambda"])
        worst_theta = max(worst_theta, i - bd.theta(d)[0])
        worst_h = max(worst_h, i - bd.h_inputs_given_r(d))
    bell_dag = cg.bell()
    worst_chsh = -math.inf
    for seed in range(1000):
        d = orc.sample_causal_model(bell_dag, {"Lambda": 2 + seed % 4}, seed=seed, alpha=0.2 + (seed % 4) / 3)
        worst_chsh = max(worst_chsh, bf.chsh(bf.behavior_from_distribution(d, ["X", "Y"], ["A", "B"])))
    ok = worst_theta <= 1e-9 and worst_h <= 1e-9 and worst_chsh <= 2 + 1e-9
    report(8, ok, f"max I - Theta {worst_theta:.3g}, max I - H(XY|R) {worst_h:.3g}, max CHSH {worst_chsh:.6f}")
    assert ok


def test_criterion_9_figure7(report):
    text = bd.figure7_csv(101)
    lines = text.strip().splitlines()
    assert lines[0] == "ratio,chsh_mi_lower,mermin_mi_lower"
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    dominates = bool(np.all(rows[:, 2] >= rows[:, 1] - 1e-12))
    monotone = bool(np.all(np.diff(rows[:, 1]) >= -1e-12) and np.all(np.diff(rows[:, 2]) >= -1e-12))
    end = rows[-1, 1]
    ok = dominates and monotone and abs(end - 0.0463) <= 5e-5
    report(9, ok, f"Mermin >= CHSH: {dominates}, monotone: {monotone}, CHSH at full violation {end:.6f}")
    assert ok


def test_criterion_10_networks(report):
    rng = np.random.default_rng(10)
    round_trip = True
    for _ in range(50):
        ca, cb, cc = rng.integers(1, 4, size=3)
        t = rng.random(ca * cb * cc)
        d = Distribution([("A", int(ca)), ("B", int(cb)), ("C", int(cc))], t / t.sum())
        back = cg.split_variable(cg.merge_variables(d, [("AB", ["A", "B"])]), "AB", [("A", int(ca)), ("B", int(cb))])
        round_trip &= back.names == d.names and np.array_equal(back.table, d.table)
    iso = cg.isomorphic(cg.twos_and_n(2), cg.cyclic(3)) and cg.isomorphic(cg.cyclic(3), cg.triangle())
    quantum_value = bf.bilocality(q.bilocality_quantum_behavior())[2]
    chain = cg.nlocality_chain(2)
    worst = -math.inf
    for seed in range(1000):
        cards = {"A2": 4 if seed % 2 else 2, "Lambda1": 2 + seed % 3, "Lambda2": 2 + (seed // 3) % 3}
        d = orc.sample_causal_model(chain, cards, seed=seed, alpha=0.2 + (seed % 5) / 4)
        beh = bf.behavior_from_distribution(d, ["X1", "X3"], ["A1", "A2", "A3"])
        worst = max(worst, bf.bilocality(beh)[2])
    ok = bool(round_trip) and iso and quantum_value > 2 and worst <= 2 + 1e-9
    report(10, ok, f"round trip {bool(round_trip)}, isomorphisms {iso}, quantum {quantum_value:.6f}, "
                   f"classical max {worst:.6f}")
    assert ok
