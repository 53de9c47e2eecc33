import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freechoice import causal_graphs as cg
from freechoice.errors import CapacityError, UnknownVariableError
from freechoice.probtab import Distribution


def test_dag_rejects_cycles_and_unknown_nodes():
    with pytest.raises(ValueError):
        cg.Dag((("A", False), ("B", False)), (("A", "B"), ("B", "A")))
    with pytest.raises(UnknownVariableError):
        cg.Dag((("A", False),), (("A", "B"),))
    with pytest.raises(ValueError):
        cg.Dag((("A", False), ("A", True)), ())


def test_bell_local_markov():
    stmts = {str(s) for s in cg.local_markov_constraints(cg.bell())}
    assert "I(X : Lambda,Y,B)" in stmts
    assert "I(A : Y,B | Lambda,X)" in stmts
    assert "I(Lambda : X,Y)" in stmts


def test_local_markov_skips_nodes_with_nothing_to_separate():
    dag = cg.Dag((("A", False), ("B", False)), (("A", "B"),))
    assert cg.local_markov_constraints(dag) == []


def test_bell_md_aux_structure():
    dag = cg.bell_md_aux(outcomes=False)
    assert dag.names == ("X", "Y", "R", "Ux", "Uy", "Lambda")
    assert set(dag.latent) == {"Ux", "Uy", "Lambda"}
    assert dag.parents("R") == ("Ux", "Uy")
    assert dag.parents("X") == ("Ux", "Lambda")
    assert cg.latent_roots(dag) == ("Ux", "Uy", "Lambda")
    full = cg.bell_md_aux()
    assert set(full.parents("A")) == {"X", "Ux", "Lambda"}


def test_md_aux_merges_into_triangle():
    merged = cg.merge_nodes(cg.bell_md_aux(), [("alpha", ["X", "A"]), ("beta", ["Y", "B"])])
    assert cg.isomorphic(merged, cg.triangle())
    assert not cg.isomorphic(cg.bell_md_aux(), cg.triangle())


def test_twos_and_n_two_is_cyclic_three_is_triangle():
    assert cg.isomorphic(cg.twos_and_n(2), cg.cyclic(3))
    assert cg.isomorphic(cg.cyclic(3), cg.triangle())
    assert not cg.isomorphic(cg.twos_and_n(3), cg.cyclic(4))


def test_isomorphism_respects_latent_flag():
    a = cg.Dag((("S", True), ("V", False)), (("S", "V"),))
    b = cg.Dag((("S", False), ("V", False)), (("S", "V"),))
    assert not cg.isomorphic(a, b)


def test_nlocality_chain_shape():
    dag = cg.nlocality_chain(2)
    assert dag.observed == ("X1", "X3", "A1", "A2", "A3")
    assert dag.parents("A2") == ("Lambda1", "Lambda2")
    assert cg.latent_roots(dag) == ("Lambda1", "Lambda2")


def test_scenario_lookup_and_size_limits():
    assert cg.scenario("cyclic", 4) == cg.cyclic(4)
    with pytest.raises(ValueError):
        cg.scenario("nope")
    with pytest.raises(CapacityError):
        cg.twos_and_n(1)
    with pytest.raises(CapacityError):
        cg.nlocality_chain(cg.MAX_SCENARIO_N + 1)


@pytest.mark.parametrize("name", sorted(cg.SCENARIOS))
def test_json_round_trip(name):
    args = (3,) if name in ("multipartite_bell_md_aux", "twos_and_n", "cyclic", "nlocality_chain",
                            "nlocality_md_aux") else ()
    dag = cg.scenario(name, *args)
    assert cg.Dag.from_json(dag.to_json()) == dag


def test_merge_nodes_rejects_overlap():
    with pytest.raises(ValueError):
        cg.merge_nodes(cg.bell(), [("P", ["X", "A"]), ("Q", ["A", "B"])])


def test_merge_variables_layout():
    t = np.arange(12, dtype=float).reshape(2, 3, 2)
    d = Distribution([("A", 2), ("B", 3), ("C", 2)], t / t.sum())
    m = cg.merge_variables(d, [("AC", ["A", "C"])])
    assert m.names == ("AC", "B")
    assert m.cardinality("AC") == 4
    # AC = 2*a + c
    assert m.table[2 * 1 + 0, 2] == d.table[1, 2, 0]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_merge_split_round_trip_is_bit_exact(ca, cb, cc, seed):
    rng = np.random.default_rng(seed)
    t = rng.random(ca * cb * cc)
    d = Distribution([("A", ca), ("B", cb), ("C", cc)], t / t.sum())
    m = cg.merge_variables(d, [("AB", ["A", "B"])])
    back = cg.split_variable(m, "AB", [("A", ca), ("B", cb)])
    assert back.names == d.names
    np.testing.assert_array_equal(back.table, d.table)


def test_split_rejects_bad_factorisation():
    d = Distribution.uniform([("R", 4)])
    with pytest.raises(ValueError):
        cg.split_variable(d, "R", [("R0", 3), ("R1", 2)])


def test_source_independence_form():
    from freechoice.cones import shannon_cone

    dag = cg.triangle()
    f = cg.source_independence_constraint(dag, shannon_cone(dag.names).space)
    terms = f.terms()
    # H(Ux) + H(Uy) + H(Lambda) - H(Ux,Uy,Lambda)
    assert sum(1 for v in terms.values() if v > 0) == 3
    assert sum(1 for v in terms.values() if v < 0) == 1
