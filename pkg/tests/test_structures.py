from fractions import Fraction
from itertools import product

import pytest

from _corpus import (condition_mutants, exact, line_algebroid, matched_lie_algebras, perturb,
                     single_tensor_mutations, standard_with_connection, valid_corpus, zero_split)
from lakit.basering import Poly
from lakit.calculus import AnchoredBundle, Connection, DullBracket
from lakit.constructions import (ALT2, make_quadratic_lie_algebra, standard_la_courant_over_lie_algebroid,
                                 tangent_double_matched_pair)
from lakit.linalg import FreeModule, Metric, TensorMap
from lakit.structures import (CourantData, cotangent, check_courant, check_la_courant, check_matched_M, check_matched_m,
                              check_selfdual_2rep, check_split_lie2)


def cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def cross_algebra(c01=(0, 0, 1)):
    return make_quadratic_lie_algebra({(0, 1): list(c01), (1, 2): [1, 0, 0], (2, 0): [0, 1, 0]},
                                      [[int(i == j) for j in range(3)] for i in range(3)])


def test_cross_product_oracle_agrees():
    """Vector identities of the cross product, evaluated directly, and the checker's verdict."""
    basis = [[int(i == j) for j in range(3)] for i in range(3)]
    for a, b, c in product(basis, repeat=3):
        jac = [x - y - z for x, y, z in zip(cross(a, cross(b, c)), cross(cross(a, b), c), cross(b, cross(a, c)))]
        assert jac == [0, 0, 0]
        assert dot(cross(a, b), c) + dot(b, cross(a, c)) == 0
    C = cross_algebra()
    for i, j in product(range(3), repeat=2):
        assert [v.constant_term() for v in C.structure(i, j)] == cross(basis[i], basis[j])
    assert check_courant(C, require_nondegenerate=True).ok


def test_abelian_courant_with_degenerate_pairing():
    M = FreeModule("E", 3, 1)
    D = TensorMap((cotangent(1),), M)               # zero anchor, so D = 0
    C = CourantData(AnchoredBundle.zero_anchor(M), Metric(M, [[1, 1, 0], [1, 1, 0], [0, 0, 0]]), {}, D)
    assert check_courant(C).ok
    assert not check_courant(C, require_nondegenerate=True).passed("nondegenerate")


def test_flipped_constant_fails_jacobi_with_witness():
    rep = check_courant(cross_algebra((1, 0, 1)))
    e = rep["CA1"]
    assert not e.passed and e.witness.poly.constant_term() != 0


@pytest.mark.parametrize("C", [cross_algebra(), cross_algebra((1, 0, 1)), exact(2), exact(3, 2)])
def test_ca4_ca5_follow_for_nondegenerate(C):
    rep = check_courant(C)
    if all(rep.passed(a) for a in ("CA1", "CA2", "CA3")):
        assert rep.passed("CA4") and rep.passed("CA5")


def test_split_lie2_examples():
    assert check_split_lie2(zero_split(2, 3, 2).lie2).ok
    A, br = line_algebroid()
    S = standard_la_courant_over_lie_algebroid(A, br)
    assert check_split_lie2(S.lie2).ok


def test_non_closed_omega_fails_condition_five():
    L = condition_mutants()["(v)"]
    assert check_split_lie2(L).failed() == ["(v)"]


def all_lie2():
    out = [(n, S.lie2) for n, S in valid_corpus()]
    out += list(condition_mutants().items())
    for n, S in valid_corpus()[:4]:
        out += [(f"{n}/{m}", T.lie2) for m, T in single_tensor_mutations(S)]
    return out


@pytest.mark.parametrize("name,L", all_lie2(), ids=[n for n, _ in all_lie2()])
def test_derived_identities_follow(name, L):
    rep = check_split_lie2(L)
    if rep.passed("(ii)"):
        assert rep.passed("D1")
    if rep.passed("(iii)"):
        assert rep.passed("omega_dorfman_curv")
    if rep.passed("(ii)"):
        assert rep.passed("rho_delta")


def test_selfdual_rep_of_flat_metric_connection():
    S = valid_corpus()[2][1]            # tangent prolongation, flat coordinate connection
    P = S.rep
    assert P.nablaQ.table == {} or all(v.is_zero() for v in P.nablaQ.table.values())
    assert check_selfdual_2rep(P).ok


def test_zero_selfdual_rep():
    assert check_selfdual_2rep(zero_split(1, 3, 2).rep).ok


def test_selfdual_R_mutation():
    P = zero_split(0, 2, 2).rep
    R = perturb(P.R, (0, 1, 0, 0), Poly.one(0))
    assert check_selfdual_2rep(P.replace(R=R)).failed() == ["selfdual_R"]


def test_matched_M_on_tangent_prolongation_over_R3():
    from lakit.constructions import tangent_prolongation_la_courant
    S = tangent_prolongation_la_courant(exact(3, Fraction(1, 3)))
    assert check_matched_M(S).ok


def test_constant_omega_perturbation_breaks_M4_or_M5():
    S = valid_corpus()[2][1]
    L = S.lie2
    bad = S.replace(lie2=L.replace(omega=perturb(L.omega, (0, 1, 2, 0), Poly.const(3, 2))))
    failed = check_matched_M(bad).failed()
    assert "M4" in failed or "M5" in failed


def test_matched_M_zero_instance():
    assert check_matched_M(zero_split(2, 2, 2)).ok


def test_matched_m_rank_one_lie_algebras():
    assert check_matched_m(matched_lie_algebras()).ok


def test_matched_m_zero_actions():
    A = AnchoredBundle.zero_anchor(FreeModule("A", 2, 1))
    B = AnchoredBundle.zero_anchor(FreeModule("B", 1, 1))
    C = FreeModule("C", 2, 1)
    from lakit.structures import MatchedPair2Reps
    mp = MatchedPair2Reps(A, DullBracket.zero(A), B, DullBracket.zero(B), C,
                          TensorMap((C,), A.module), TensorMap((C,), B.module),
                          Connection.zero(A, B.module), Connection.zero(A, C),
                          TensorMap((A.module, A.module, B.module), C, {}, ALT2),
                          Connection.zero(B, A.module), Connection.zero(B, C),
                          TensorMap((B.module, B.module, A.module), C, {}, ALT2))
    assert check_matched_m(mp).ok


def test_perturbing_dA_breaks_m2():
    A, br = line_algebroid()
    mp = tangent_double_matched_pair(A, br)
    x = Poly.var(0, 1)
    rep = check_matched_m(mp.replace(dA=perturb(mp.dA, (0, 0), x)))
    assert not rep.passed("m2")
    assert rep["m2"].witness is not None


def test_la_courant_examples():
    assert check_la_courant(valid_corpus()[3][1]).ok
    assert check_la_courant(standard_with_connection()).ok


@pytest.mark.parametrize("name,S", valid_corpus()[1:4], ids=[n for n, _ in valid_corpus()[1:4]])
def test_single_tensor_mutation_fails_la_courant(name, S):
    for m, T in single_tensor_mutations(S):
        assert not check_la_courant(T).ok, m
