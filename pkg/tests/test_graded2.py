import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from _corpus import condition_mutants, perturb, valid_corpus, zero_split
from lakit.basering import Poly, variables
from lakit.graded2 import (GradedAlgebra, GradedDerivation, GradedFunction, SplitMorphism, TruncationError,
                           check_homological, check_lie2_morphism, check_poisson_axioms, check_Q_poisson_compat,
                           commutator, derivation_ops, graded_mul, homological_from_lie2, morphism_pullback,
                           poisson_from_selfdual)
from lakit.linalg import FreeModule, TensorMap
from lakit.report import Checker
from lakit.structures import check_selfdual_2rep

ALG = GradedAlgebra(FreeModule("Q", 3, 1), FreeModule("B", 2, 1), truncation=16)
x = variables(1)[0]

small = st.integers(-3, 3).filter(bool)
monomials = st.tuples(st.lists(st.integers(0, 2), max_size=3, unique=True),
                      st.lists(st.integers(0, 1), max_size=1), small, st.integers(0, 2))


def build(mono) -> GradedFunction:
    """c x^k eps^{i1} .. eps^{ir} b_j .. in the order given."""
    odd, even, c, k = mono
    out = ALG.function(x ** k * c)
    for i in odd:
        out = graded_mul(out, ALG.odd(i))
    for j in even:
        out = graded_mul(out, ALG.even(j))
    return out


def sort_sign(seq) -> int:
    """Sign of sorting ``seq`` by adjacent swaps, counted one swap at a time."""
    s, sign = list(seq), 1
    for i in range(len(s)):
        for j in range(len(s) - 1 - i):
            if s[j] > s[j + 1]:
                s[j], s[j + 1] = s[j + 1], s[j]
                sign = -sign
    return sign


elements = st.lists(monomials, min_size=1, max_size=2).map(
    lambda ms: sum((build(m) for m in ms), ALG.zero()))


@given(monomials)
def test_monomial_sign_matches_sorting(mono):
    odd, even, c, k = mono
    expected = sort_sign(odd) * c
    key = (tuple(sorted(odd)), tuple(sorted(even)))
    assert build(mono).terms == {key: x ** k * expected}


def test_odd_generators_anticommute_even_commute():
    e0, e1, b0 = ALG.odd(0), ALG.odd(1), ALG.even(0)
    f = ALG.function(x * x + 1)
    assert e0 * e1 == -(e1 * e0)
    assert (e0 * e0).is_zero()
    assert b0 * f == f * b0
    assert b0 * e1 == e1 * b0


def homogeneous_parts(a: GradedFunction):
    return [a.component(n) for n in sorted(a.degrees())]


@given(elements, elements)
def test_graded_commutativity(a, b):
    for u in homogeneous_parts(a):
        for v in homogeneous_parts(b):
            sign = -1 if (u.degree * v.degree) % 2 else 1
            assert u * v == (v * u).scale(sign)


@given(elements, elements, elements)
def test_associativity(a, b, c):
    assert (a * b) * c == a * (b * c)


def test_truncation_overflow_is_an_error():
    alg = GradedAlgebra(FreeModule("Q", 2, 0), FreeModule("B", 1, 0), truncation=3)
    with pytest.raises(TruncationError):
        alg.even(0) * alg.even(0)


def random_derivation(rng: random.Random, degree: int) -> GradedDerivation:
    def rand(deg):
        terms = {}
        for odd_len in range(0, deg + 1):
            if (deg - odd_len) % 2:
                continue
            ev = (deg - odd_len) // 2
            if odd_len > 3 or (ev and ALG.B.rank == 0):
                continue
            odd = tuple(sorted(rng.sample(range(3), odd_len)))
            even = tuple(rng.randrange(2) for _ in range(ev))
            terms[(odd, even)] = x * rng.choice([-2, 1, 3]) + rng.choice([0, 1])
        return GradedFunction(ALG, terms)

    return GradedDerivation(ALG, degree, [rand(degree)], [rand(degree + 1) for _ in range(3)],
                            [rand(degree + 2) for _ in range(2)])


def test_zero_derivation():
    Z = GradedDerivation.zero(ALG, 1)
    assert derivation_ops(Z, build(([0, 2], [1], 2, 1)), "apply").is_zero()


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.sampled_from([-2, -1, 1, 2]), monomials, monomials)
def test_derivation_leibniz(seed, degree, ma, mb):
    X = random_derivation(random.Random(seed), degree)
    a, b = build(ma), build(mb)
    lhs = X(a * b)
    rhs = X(a) * b + (a * X(b)).scale(-1 if (degree * a.degree) % 2 else 1)
    assert lhs == rhs


def test_commutator_of_odd_derivation_with_itself():
    X = random_derivation(random.Random(3), 1)
    a = build(([0], [], 2, 1))
    assert commutator(X, X)(a) == X(X(a)).scale(2)


def test_poisson_values_on_generators():
    S = valid_corpus()[2][1]                  # tangent prolongation over R^2
    br = poisson_from_selfdual(S.rep)
    alg = br.alg
    x1, x2 = alg.coordinate(0), alg.coordinate(1)
    assert br(x1, x2).is_zero()
    Qs = S.Q.dual()
    for k in range(S.Q.rank):
        for l in range(S.Q.rank):
            assert br(alg.odd(k), alg.odd(l)) == alg.function(S.rep.dQ(Qs.frame(k)).dot(Qs.frame(l)))


def test_zero_rep_bracket():
    S = zero_split(1, 2, 2)
    br = poisson_from_selfdual(S.rep)
    gens = [g for _, _, g in br.alg.generators()]
    assert all(br(a, b).is_zero() for a in gens for b in gens)


def test_b_bracket_reproduces_lie_bracket():
    from lakit.calculus import DullBracket
    S = zero_split(0, 1, 2)
    B = S.rep.B
    rep = S.rep.replace(bracket=DullBracket(B, {(0, 1): [Poly.one(0), Poly.zero(0)]}))
    br = poisson_from_selfdual(rep)
    alg = br.alg
    assert br(alg.even(0), alg.even(1)) == alg.even(0)
    assert br(alg.odd(0), alg.even(0)).is_zero()


@pytest.mark.parametrize("name,S", valid_corpus()[:5], ids=[n for n, _ in valid_corpus()[:5]])
def test_poisson_axioms_on_valid_reps(name, S):
    assert check_poisson_axioms(poisson_from_selfdual(S.rep)).ok


def test_poisson_skew_fails_when_R_is_not_alternating():
    S = zero_split(0, 2, 2)
    R = S.rep.R
    rep = S.rep.replace(R=TensorMap(R.inputs, R.output, {(0, 1, 0, 1): 1}))     # R(b2, b1) stays 0
    assert not check_poisson_axioms(poisson_from_selfdual(rep)).passed("graded_skew")


def test_symmetric_part_of_R_is_caught_by_the_selfdual_check():
    S = zero_split(0, 2, 2)
    R = perturb(perturb(S.rep.R, (0, 1, 0, 1), Poly.one(0)), (0, 1, 1, 0), Poly.one(0))
    rep = S.rep.replace(R=R)
    assert not check_selfdual_2rep(rep).passed("selfdual_R")
    # the bracket only reads the part of R that is skew in the Q slots
    assert check_poisson_axioms(poisson_from_selfdual(rep)).passed("graded_skew")


def test_zero_bracket_passes():
    assert check_poisson_axioms(poisson_from_selfdual(zero_split(1, 2, 1).rep)).ok


def test_homological_of_zero_data_is_zero():
    Qv = homological_from_lie2(zero_split(1, 2, 1).lie2)
    assert all(g.is_zero() for g in Qv.images())
    assert check_homological(Qv).ok


def test_homological_on_functions_and_degree_one():
    S = valid_corpus()[2][1]
    L = S.lie2
    Qv = homological_from_lie2(L)
    alg = Qv.alg
    f = Checker(1).random_poly(2)
    assert Qv(alg.function(f)) == alg.one_form(L.Q.rho_star_d(f))
    Qs = S.Q.dual()
    for k in range(S.Q.rank):
        image = Qv(alg.odd(k))
        b_part = GradedFunction(alg, {key: c for key, c in image.terms.items() if key[1]})
        assert b_part == alg.b_section(L.dB(Qs.frame(k)))
        t = Qs.frame(k)
        two_form = image - b_part
        for i in range(S.Q.rank):
            for j in range(i + 1, S.Q.rank):
                qi, qj = S.Q.frame(i), S.Q.frame(j)
                expected = L.Q.rho(qi)(t.dot(qj)) - L.Q.rho(qj)(t.dot(qi)) - t.dot(L.dull(qi, qj))
                assert two_form.terms.get(((i, j), ()), Poly.zero(2)) == expected


def test_homological_fails_on_degree_two_for_open_omega():
    rep = check_homological(homological_from_lie2(condition_mutants()["(v)"]))
    assert not rep.passed("Q2_degree2")
    assert rep.passed("Q2_coordinates")


def test_truncation_does_not_change_verdicts():
    L = condition_mutants()["(iv)"]
    assert check_homological(homological_from_lie2(L, 6)).failed() == \
        check_homological(homological_from_lie2(L, 8)).failed()


def test_compat_on_tangent_prolongation():
    S = valid_corpus()[1][1]
    assert check_Q_poisson_compat(homological_from_lie2(S.lie2), poisson_from_selfdual(S.rep)).ok


def test_compat_detects_anchor_mismatch():
    S = valid_corpus()[1][1]                 # p = 1
    L = S.lie2
    bad = S.replace(lie2=L.replace(dB=perturb(L.dB, (0, 0), Poly.one(1))))
    rep = check_Q_poisson_compat(homological_from_lie2(bad.lie2), poisson_from_selfdual(bad.rep))
    assert not rep.passed("compat(tau,f)")


def test_identity_morphism():
    S = valid_corpus()[3][1]
    Qv = homological_from_lie2(S.lie2)
    mu = SplitMorphism.identity(Qv.alg)
    xi = Qv(Qv.alg.odd(0)) + Qv.alg.function(Checker(2).random_poly(2))
    assert mu.pullback(xi) == xi
    assert check_lie2_morphism(mu, Qv, Qv).ok


def test_mu12_shifts_degree_two_pullback():
    alg = GradedAlgebra(FreeModule("Q", 2, 0), FreeModule("B", 1, 0))
    one, zero = Poly.one(0), Poly.zero(0)
    w = alg.odd(0) * alg.odd(1)
    mu = morphism_pullback([], [[one, zero], [zero, one]], [[one]], [w], alg, alg)
    assert mu.pullback(alg.even(0)) == alg.even(0) + w
    assert mu.pullback(alg.odd(1)) == alg.odd(1)


def test_morphism_into_zero_structure():
    S = valid_corpus()[1][1]
    Q1 = homological_from_lie2(S.lie2)
    zero = GradedDerivation.zero(Q1.alg, 1)
    mu = SplitMorphism.identity(Q1.alg)
    assert not check_lie2_morphism(mu, Q1, zero).ok
    assert check_lie2_morphism(mu, zero, zero).ok


def test_morphism_with_scaled_generators():
    """Rescaling eps by 2 and b by 4 pulls Q back to itself when the structure
    is homogeneous: dB and the bracket terms scale consistently."""
    S = zero_split(0, 2, 1)
    alg = GradedAlgebra(S.Q, S.B)
    two, zero = Poly.const(Fraction(2), 0), Poly.zero(0)
    mu = morphism_pullback([], [[two, zero], [zero, two]], [[Poly.const(4, 0)]], None, alg, alg)
    Qv = homological_from_lie2(S.lie2)
    assert check_lie2_morphism(mu, Qv, Qv).ok
