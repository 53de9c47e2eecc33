"""Command-line front end.

Exit codes: 0 success, 2 parse error, 3 shape or missing-variable error,
4 verification failure. Verdicts are data and never change the exit code.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bell as bf
from . import bounds, lemmas, oracles, quantum
from .causal_graphs import SCENARIOS, scenario
from .cones import cone_to_json, fm_eliminate, is_implied, maximize, remove_redundant, shannon_cone
from .errors import EliminationAborted, ShapeError, UnknownVariableError
from .forms import LinForm, entropy_form
from .probtab import Distribution

EXIT_OK, EXIT_PARSE, EXIT_SHAPE, EXIT_VERIFY = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}", EXIT_PARSE) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise CliError(f"{path}: malformed JSON: {e}", EXIT_PARSE) from None


def _load(path: str, cls):
    data = _read_json(path)
    try:
        return cls.from_dict(data)
    except (KeyError, TypeError) as e:
        raise CliError(f"{path}: not a valid {cls.__name__} document ({e})", EXIT_PARSE) from None
    except ValueError as e:
        raise CliError(f"{path}: {e}", EXIT_SHAPE) from None


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)


def _names(s: str | None) -> list[str]:
    return [n for n in (s or "").split(",") if n]


# -- eval ------------------------------------------------------------------------


def cmd_eval(args) -> int:
    beh = _load(args.behavior, bf.Behavior)
    f = args.functional
    if f == "chsh":
        value = bf.chsh(beh)
    elif f == "mermin":
        value = bf.mermin(beh)
    elif f.startswith("cglmp"):
        d = int(f.split(":", 1)[1]) if ":" in f else None
        value = bf.cglmp(beh, d)
    elif f == "bilocality":
        value = bf.bilocality(beh, normalize=args.normalize)[2]
    elif f.startswith("chain:"):
        value = bf.chain_nlocality(beh, int(f.split(":", 1)[1]), normalize=args.normalize)
    else:
        raise CliError(f"unknown functional {f!r}", EXIT_PARSE)
    print(f"{value:.9f}")
    return EXIT_OK


# -- verdict ----------------------------------------------------------------------


def cmd_verdict(args) -> int:
    dist = _load(args.distribution, Distribution)
    test = args.test
    r = _names(args.aux)
    r = r[0] if len(r) == 1 else r
    default_in = ["X", "Y", "Z"] if test.startswith("mermin") else ["X", "Y"]
    default_out = ["A", "B", "C"] if test.startswith("mermin") else ["A", "B"]
    inputs = _names(args.inputs) or default_in
    outputs = _names(args.outputs) or default_out
    missing = [n for n in inputs + outputs + _names(args.aux) if n not in dist.names]
    if missing:
        raise CliError(f"distribution lacks designated variables {missing}", EXIT_SHAPE)
    beh = bf.behavior_from_distribution(dist, inputs, outputs)
    md = dist
    if test in ("chsh-mi", "chsh-l1", "cglmp") or test.startswith("cglmp:"):
        # Theta uses the names X, Y; rename the designated inputs if needed
        if len(inputs) != 2:
            raise CliError("this test needs exactly two inputs", EXIT_SHAPE)
        md = _renamed(dist, dict(zip(inputs, ("X", "Y"))))
    if test == "chsh-mi":
        report = bounds.check_chsh_mi(beh, md, r=r)
    elif test == "chsh-l1":
        report = bounds.check_chsh_l1(beh, md, r=r, convention=args.pinsker)
    elif test.startswith("cglmp"):
        d = int(test.split(":", 1)[1]) if ":" in test else beh.output_shape[0]
        report = bounds.check_cglmp(beh, d, md, r=r, convention=args.pinsker)
    elif test == "mermin":
        value = bf.mermin(beh)
        report = bounds.check_generic(value, "mermin-uniform8" if args.mode == "uniform-8" else "mermin-odd4",
                                      dist, inputs, r=r)
    elif test == "generic":
        if not args.formula:
            raise CliError("--test generic needs --formula", EXIT_PARSE)
        family = args.formula.split("-")[0]
        value = {"chsh": bf.chsh, "mermin": bf.mermin, "cglmp": bf.cglmp}[family](beh)
        report = bounds.check_generic(value, args.formula, dist, inputs, r=r, convention=args.pinsker)
    else:
        raise CliError(f"unknown test {test!r}", EXIT_PARSE)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def _renamed(dist: Distribution, mapping: dict) -> Distribution:
    names = [mapping.get(n, n) for n in dist.names]
    clash = {"X", "Y"} & {n for n in dist.names if n not in mapping}
    if clash and set(mapping) != set(mapping.values()):
        raise CliError(f"cannot rename inputs onto existing variables {sorted(clash)}", EXIT_SHAPE)
    return Distribution(list(zip(names, dist.shape)), dist.table)


# -- verify --------------------------------------------------------------------


def _print_report(rep) -> bool:
    for line in rep.lines:
        print(f"{rep.title}: {line}")
    return rep.passed


def _suite_appendix_a(m_values, modes) -> lemmas.Report:
    rep = lemmas.Report("appendixA")
    for mode in modes:
        for m in m_values:
            model = oracles.mermin_optimal_md_model(m, mode)
            beh, _ = oracles.behavior_of(model)
            got_m, got_i = bf.mermin(beh), oracles.model_mi(model)
            want_i = bounds.mermin_mi_lower(m, mode)
            rep.lines.append(lemmas.CheckLine(f"M={m:g} {mode} Bell value matched", abs(got_m - m) <= 1e-6,
                                              f"{got_m:.9f}"))
            rep.lines.append(lemmas.CheckLine(f"M={m:g} {mode} MI equals bound", abs(got_i - want_i) <= 1e-6,
                                              f"{got_i:.9f} vs {want_i:.9f}"))
    return rep


def _suite_appendix_b(n_models: int, seed: int) -> lemmas.Report:
    rng = np.random.default_rng(seed)
    corr_ok = ns_ok = mi_ok = True
    worst_ns = worst_mi = 0.0
    for _ in range(n_models):
        model = oracles.random_md_model(rng, exact=True)
        lifted = oracles.lift_model(model)
        for cell in np.ndindex(2, 2, 2):
            corr_ok &= oracles.exact_correlator(model, cell) == oracles.exact_correlator(lifted, cell)
        beh = oracles.nosignaling_lift(model)
        ok, worst = bf.is_no_signaling(beh, 1e-12)
        ns_ok &= ok
        worst_ns = max(worst_ns, worst)
        diff = abs(oracles.model_mi(model) - oracles.model_mi(lifted))
        worst_mi = max(worst_mi, diff)
        mi_ok &= diff <= 1e-9
    rep = lemmas.Report("appendixB")
    rep.lines.append(lemmas.CheckLine("correlators preserved", bool(corr_ok), f"{n_models} models, exact"))
    rep.lines.append(lemmas.CheckLine("no-signaling", bool(ns_ok), f"worst {worst_ns:.3g}"))
    rep.lines.append(lemmas.CheckLine("MI preserved", bool(mi_ok), f"worst {worst_mi:.3g}"))
    return rep


def _suite_cones() -> list[lemmas.Report]:
    rep = lemmas.Report("cones")
    c3 = shannon_cone(3)
    s = c3.space
    sub = entropy_form(s, ["X1", "X3"]) + entropy_form(s, ["X2", "X3"]) - entropy_form(s, ["X1", "X2", "X3"]) \
        - entropy_form(s, ["X3"])
    rep.lines.append(lemmas.CheckLine("submodularity implied by shannon_cone(3)", is_implied(c3, sub).implied))
    c2 = shannon_cone(2)
    s2 = c2.space
    indep = entropy_form(s2, ["X1", "X2"]) - entropy_form(s2, ["X1"]) - entropy_form(s2, ["X2"])
    rep.lines.append(lemmas.CheckLine("H(X1)+H(X2) <= H(X1,X2) not implied", not is_implied(c2, indep).implied))
    reduced = remove_redundant(c3)
    probe = entropy_form(s, ["X1", "X2"]) * 3 - entropy_form(s, ["X3"])
    cap = LinForm.build(s, {"X1,X2,X3": -1}, 1)  # H(X1,X2,X3) <= 1 makes the LP bounded
    same = (maximize(c3.with_constraints(inequalities=[cap]), probe).optimum
            == maximize(reduced.with_constraints(inequalities=[cap]), probe).optimum)
    rep.lines.append(lemmas.CheckLine("redundancy removal keeps optima", same,
                                      f"{len(c3)} -> {len(reduced)} inequalities"))
    projected = fm_eliminate(c3, s.column(["X1", "X2", "X3"]))
    rep.lines.append(lemmas.CheckLine("eliminating H(X1,X2,X3) keeps H(X1,X2) >= H(X1)",
                                      is_implied(projected, entropy_form(s, ["X1", "X2"]) - entropy_form(s, ["X1"])).implied))
    return [rep, lemmas.verify_mi_lower_bound()]


def cmd_verify(args) -> int:
    suite = args.suite
    try:
        if suite == "lemma1":
            reps = [lemmas.verify_lemma1_bounds()]
        elif suite == "lemma2":
            reps = [lemmas.verify_lemma2()]
        elif suite == "appendixA":
            m_values = [args.m] if args.m is not None else [2.2, 2.8, 3.4, 4.0]
            reps = [_suite_appendix_a(m_values, ["uniform-8", "odd-4"])]
        elif suite == "appendixB":
            reps = [_suite_appendix_b(args.models, args.seed)]
        elif suite == "cones":
            reps = _suite_cones()
        else:
            raise CliError(f"unknown suite {suite!r}", EXIT_PARSE)
    except EliminationAborted as e:
        print(f"{suite}: skipped ({e})")
        return EXIT_OK
    ok = all([_print_report(r) for r in reps])
    return EXIT_OK if ok else EXIT_VERIFY


# -- data commands ------------------------------------------------------------------


def cmd_scan_fritz(args) -> int:
    if not 0.0 <= args.vmin < args.vmax <= 1.0:
        raise CliError("need 0 <= vmin < vmax <= 1", EXIT_PARSE)
    rows = quantum.scan_fritz(args.vmin, args.vmax, args.step)
    _emit(quantum.scan_csv(rows), args.output)
    return EXIT_OK


def cmd_fig7(args) -> int:
    if args.resolution < 2:
        raise CliError("resolution must be >= 2", EXIT_PARSE)
    _emit(bounds.figure7_csv(args.resolution), args.output)
    return EXIT_OK


def cmd_derive_cone(args) -> int:
    def progress(coordinate, remaining, size):
        if args.verbose:
            print(f"eliminated {coordinate}: {remaining} coordinates left, {size} inequalities",
                  file=sys.stderr, flush=True)

    try:
        derived = lemmas.derive_md_upper_bounds(args.max_inequalities, args.time_budget, progress)
    except EliminationAborted as e:
        print(f"derive-cone: skipped ({e}); progress {json.dumps(e.progress, sort_keys=True)}")
        return EXIT_OK
    rep = lemmas.check_derived(derived)
    if args.output:
        _emit(cone_to_json(derived, indent=1) + "\n", args.output)
    print(f"derive-cone: {rep.data['n_inequalities']} inequalities after projection")
    for f in rep.data["upper_bounds_on_t"]:
        print(f"  {f} >= 0")
    ok = _print_report(rep)
    return EXIT_OK if ok else EXIT_VERIFY


def _parse_cards(items) -> dict[str, int]:
    out = {}
    for item in items or []:
        name, _, val = item.partition("=")
        if not val:
            raise CliError(f"--card expects NAME=K, got {item!r}", EXIT_PARSE)
        out[name] = int(val)
    return out


def cmd_sample(args) -> int:
    params = [args.n] if args.n is not None else []
    try:
        dag = scenario(args.scenario, *params)
    except TypeError as e:
        raise CliError(f"bad parameters for {args.scenario}: {e}", EXIT_PARSE) from None
    dist = oracles.sample_causal_model(dag, _parse_cards(args.card), args.seed, keep_latent=args.keep_latent,
                                       alpha=args.alpha)
    _emit(dist.to_json() + "\n", args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freechoice", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate a Bell functional on a behavior JSON file")
    e.add_argument("behavior")
    e.add_argument("--functional", required=True, help="chsh | mermin | cglmp:d | bilocality | chain:n")
    e.add_argument("--normalize", action="store_true", help="average bilocality/chain sums (bound 1)")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verdict", help="compare measurement-dependence lower and upper bounds")
    v.add_argument("distribution")
    v.add_argument("--test", required=True, help="chsh-mi | chsh-l1 | cglmp:d | mermin | generic")
    v.add_argument("--inputs", help="comma-separated input variables")
    v.add_argument("--outputs", help="comma-separated output variables")
    v.add_argument("--aux", default="R", help="auxiliary variable(s) R, comma-separated to merge")
    v.add_argument("--mode", choices=bounds.MERMIN_MODES, default="uniform-8")
    v.add_argument("--formula", choices=sorted(bounds.FORMULAS))
    v.add_argument("--pinsker", choices=sorted(bounds.PINSKER_FACTORS), default="standard",
                   help="constant in M^2 <= c I / log2 e (standard: c=2, printed: c=1)")
    v.set_defaults(func=cmd_verdict)

    f = sub.add_parser("verify", help="run a verification suite")
    f.add_argument("--suite", required=True, choices=["lemma1", "lemma2", "appendixA", "appendixB", "cones"])
    f.add_argument("--m", type=float, help="Mermin value for appendixA (default: 2.2, 2.8, 3.4, 4.0)")
    f.add_argument("--models", type=int, default=100, help="random models for appendixB")
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=cmd_verify)

    s = sub.add_parser("scan-fritz", help="CSV scan of the noisy Fritz distribution")
    s.add_argument("--vmin", type=float, default=0.0)
    s.add_argument("--vmax", type=float, default=1.0)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_scan_fritz)

    g = sub.add_parser("fig7", help="CSV of the CHSH and Mermin lower-bound curves")
    g.add_argument("--resolution", type=int, default=101)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_fig7)

    d = sub.add_parser("derive-cone", help="Fourier-Motzkin projection onto {X,Y,R} entropies and t")
    d.add_argument("--max-inequalities", type=int, default=200_000)
    d.add_argument("--time-budget", type=float, default=None, help="seconds")
    d.add_argument("-o", "--output", help="write the projected cone as JSON")
    d.add_argument("-v", "--verbose", action="store_true")
    d.set_defaults(func=cmd_derive_cone)

    m = sub.add_parser("sample", help="sample a random causal model as a distribution JSON")
    m.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    m.add_argument("--n", type=int, help="size parameter for parametrised scenarios")
    m.add_argument("--card", action="append", help="NAME=K cardinality (default 2)")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--alpha", type=float, default=1.0, help="Dirichlet concentration")
    m.add_argument("--keep-latent", action="store_true")
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_sample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (ShapeError, UnknownVariableError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SHAPE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
