"""Constructors for Courant algebroids, LA-Courant data and the structures
derived from them: the degenerate Courant algebroid on the core, changes of
Lagrangian splitting and the Courant algebroid of a Manin pair.

Constructors do not assume validity of their input unless stated; run the
matching checker on the result.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .basering import DimensionError, Derivation, Poly, differential
from .calculus import (AnchoredBundle, Connection, DorfmanConnection, DullBracket, curvature,
                       dorfman_to_dull, dull_to_dorfman, jacobiator, koszul_d, check_dull_axioms)
from .linalg import (FreeModule, Metric, Section, SubBundle, TensorMap, annihilator,
                     complement_basis, rational_inverse, rational_rank, same_module, witness_for)
from .report import CheckEntry, CheckReport, Checker, Functions
from .structures import (CourantData, LACourantSplit, MatchedPair2Reps, SelfDual2Rep, SplitLie2,
                         check_courant, check_la_courant, check_matched_m, cotangent)

ALT2 = (("alt", 0, 1),)
ALT3 = (("alt", 0, 1), ("alt", 1, 2), ("alt", 0, 2))


class PreconditionError(ValueError):
    """The input fails the checks a construction relies on."""


def _report_error(what: str, report: CheckReport) -> PreconditionError:
    return PreconditionError(f"{what}: failed {', '.join(report.failed())}")


def _zero(p: int) -> Poly:
    return Poly.zero(p)


def _lie_on_dual(A: AnchoredBundle, br: DullBracket, a, alpha) -> Section:
    """Lie derivative on the dual: (L_a alpha)(b) = rho(a) alpha(b) - alpha([a, b])."""
    Am = A.module
    X = A.rho(a)
    return Am.dual().section(X(Section(alpha).dot(e)) - Section(alpha).dot(br(a, e)) for e in Am.frames())


def _lie_derivative_form(X: Derivation, theta: Sequence[Poly]) -> Section:
    """L_X theta for a vector field X and a 1-form theta on the base."""
    p = X.num_vars
    out = []
    for k in range(p):
        acc = X(theta[k])
        for j in range(p):
            d = X.components[j].diff(k)
            if d and theta[j]:
                acc = acc + theta[j] * d
        out.append(acc)
    return Section(out)


def _contract_d_form(X: Derivation, theta: Sequence[Poly]) -> Section:
    """i_X d theta = L_X theta - d(theta(X))."""
    val = Section(theta).dot(X.components) if X.num_vars else Poly.zero(0)
    return _lie_derivative_form(X, theta) - Section(differential(val))


# -- Courant algebroids ----------------------------------------------------

def make_quadratic_lie_algebra(constants, gram: Sequence[Sequence]) -> CourantData:
    """Courant algebroid over a point from structure constants and an
    invariant form.  ``constants`` maps (i, j) to the vector [e_i, e_j], or
    is a nested list c[i][j][k]."""
    if isinstance(constants, Mapping):
        table = dict(constants)
        n = len(gram)
    else:
        n = len(constants)
        table = {(i, j): list(constants[i][j]) for i in range(n) for j in range(n)}
    M = FreeModule("g", n, 0)
    full = {}
    for (i, j), v in table.items():
        s = M.section(v)
        full[(i, j)] = s
        if (j, i) not in table:
            full[(j, i)] = -s
    return CourantData(AnchoredBundle.zero_anchor(M), Metric(M, gram, nondegenerate=True), full)


def exact_courant_module(p: int) -> FreeModule:
    return FreeModule("TM+T*M", 2 * p, p)


def make_exact_courant(p: int, H: TensorMap | None = None) -> CourantData:
    """TM + T*M with pairing xi(Y) + eta(X), anchor the projection and
    bracket ([X, Y], L_X eta - i_Y d xi + i_Y i_X H).  H must be closed."""
    T = AnchoredBundle.tangent(p)
    TMm = T.module
    if H is None:
        H = TensorMap.zero((TMm,) * 3, FreeModule("R", 1, p), ALT3)
    if H.arity != 3 or any(m.rank != p for m in H.inputs) or H.output.rank != 1:
        raise DimensionError("H must be a scalar 3-form on TM")
    H = H.with_symmetry(ALT3)
    dH = koszul_d(DullBracket.zero(T), H)
    if dH.coeffs:
        key = min(dH.coeffs)
        raise ValueError(f"H is not closed: dH{list(k + 1 for k in key[:-1])} = {dH.coeffs[key]}")
    E = exact_courant_module(p)
    anchor = [Derivation.partial(i, p) for i in range(p)] + [Derivation.zero(p)] * p
    gram = [[int(abs(i - j) == p) for j in range(2 * p)] for i in range(2 * p)]
    table = {}
    for a in range(p):
        for b in range(p):
            if a != b:
                v = [_zero(p)] * p + [H(TMm.frame(a), TMm.frame(b), TMm.frame(k))[0] for k in range(p)]
                table[(a, b)] = v
    return CourantData(AnchoredBundle(E, anchor), Metric(E, gram, nondegenerate=True), table)


def flat_connection(acting: AnchoredBundle, on: FreeModule) -> Connection:
    """nabla_a s = rho(a)(s) componentwise."""
    return Connection.zero(acting, on)


def _require_metric(conn: Connection, g: Metric) -> None:
    M = g.module
    for a in range(conn.acting.rank):
        X = conn.acting.module.frame(a)
        for i in range(M.rank):
            for j in range(i, M.rank):
                r = g.pair(conn(X, M.frame(i)), M.frame(j)) + g.pair(M.frame(i), conn(X, M.frame(j)))
                if r:
                    raise PreconditionError(f"connection is not metric: frames ({a}, {i}, {j}) give {r}")


# -- the three families of LA-Courant data -------------------------------------

def tangent_prolongation_la_courant(E: CourantData, conn: Connection | None = None) -> LACourantSplit:
    """Decomposed tangent prolongation of a Courant algebroid, split by a
    metric TM-connection on E (flat coordinate connection by default).

    Lie 2 side: d_B = rho (E* identified with E), the dull bracket
    [[e, e']] - rho^* <nabla_. e, e'> raised, the basic connection on TM and
    the basic curvature.  Representation side: (Id, nabla, nabla, R_nabla).
    """
    M, g = E.module, E.pairing
    p = M.num_vars
    if not g.nondegenerate:
        raise PreconditionError("the tangent prolongation needs a nondegenerate pairing")
    T = AnchoredBundle.tangent(p)
    TMm = T.module
    conn = conn or flat_connection(T, M)
    if not (same_module(conn.acting.module, TMm) and same_module(conn.on, M)):
        raise DimensionError("conn must be a TM-connection on E")
    _require_metric(conn, g)
    Qan, Qs = E.E, M.dual()
    rho = Qan.rho

    def correction(e, e2):
        return Qan.rho_star([g.pair(conn(TMm.frame(a), e), e2) for a in range(p)])

    frames = M.frames()
    table = {(i, j): E.bracket(frames[i], frames[j]) - g.raise_(correction(frames[i], frames[j]))
             for i in range(M.rank) for j in range(M.rank) if i != j}
    dull = DullBracket(Qan, table)
    dB = TensorMap.from_function((Qs,), TMm, lambda t: rho(g.raise_(t)).components)
    nabla_bas = Connection.tabulate(
        Qan, TMm, lambda e, X: (rho(e).bracket(Derivation(X)) + rho(conn(X, e))).components)

    def W(e1, e2, X):
        nb2, nb1 = nabla_bas(e2, X), nabla_bas(e1, X)
        out = (-conn(X, E.bracket(e1, e2)) + E.bracket(conn(X, e1), e2) + E.bracket(e1, conn(X, e2))
               + conn(nb2, e1) - conn(nb1, e2))
        last = Qs.section(g.pair(conn(nabla_bas(f, X), e1), e2) for f in frames)
        return out - g.raise_(last)

    omega = TensorMap.from_function(
        (M, M, M), TMm.dual(),
        lambda e1, e2, e3: [g.pair(W(e1, e2, TMm.frame(a)), e3) for a in range(p)], ALT3)
    lie2 = SplitLie2(Qan, TMm, dB, dull, nabla_bas, omega)
    Rn = curvature(conn, DullBracket.zero(T))
    R = TensorMap.from_function((TMm, TMm, M), Qs, lambda X, Y, e: g.lower(Rn(X, Y, e)), ALT2)
    dQ = TensorMap.from_function((Qs,), M, g.raise_)
    rep = SelfDual2Rep(T, DullBracket.zero(T), M, dQ, conn, conn.dual(), R)
    return LACourantSplit(lie2, rep)


def lie_algebroid_tensor_check(A: AnchoredBundle, br: DullBracket, checker: Checker | None = None) -> CheckReport:
    report = check_dull_axioms(br, checker)
    checker = checker or Checker()
    Am = A.module
    report.add(checker.identity("jacobi", (Am, Am, Am), lambda a, b, c: jacobiator(br, a, b, c)))
    return report


def standard_dorfman(A: AnchoredBundle, conn: Connection | None = None) -> DullBracket:
    """Dull bracket ([X, Y], nabla*_X beta - nabla*_Y alpha) on TM + A*, anchored
    by the projection, for a TM-connection on A (coordinate-flat by default).
    Its dual Dorfman connection is
    Delta_{(X, alpha)}(theta, a) = (L_X theta + <nabla*_. alpha, a>, nabla_X a)."""
    p, r = A.num_vars, A.rank
    T = AnchoredBundle.tangent(p)
    conn = conn or flat_connection(T, A.module)
    dual = conn.dual()
    Q = FreeModule("TM+A*", p + r, p)
    Qan = AnchoredBundle(Q, [Derivation.partial(a, p) for a in range(p)] + [Derivation.zero(p)] * r)

    def br(q1, q2):
        X, al = q1[:p], q1[p:]
        Y, be = q2[:p], q2[p:]
        xy = Derivation(X).bracket(Derivation(Y)).components if p else ()
        return Q.section(list(xy) + list(dual(X, be) - dual(Y, al)))

    return DullBracket(Qan, {(i, j): br(Q.frame(i), Q.frame(j))
                             for i in range(Q.rank) for j in range(Q.rank) if i != j})


def standard_la_courant_over_lie_algebroid(A: AnchoredBundle, bracket: DullBracket,
                                           dull: DullBracket | DorfmanConnection | None = None,
                                           validate: bool = True) -> LACourantSplit:
    """LA-Courant data of TA + T*A over the Lie algebroid A, split by a dull
    bracket on Q = TM + A* (ordered TM first) anchored by the projection.
    The core Q* is ordered (T*M, A) accordingly.

    Lie 2 side: d_B the projection to A, nabla = pr_A Delta i_A, omega the
    A*-part of the Jacobiator.  Representation side: the basic connections
    and basic curvature of A on (rho, rho^*): A + T*M -> TM + A*.
    """
    if validate:
        rep = lie_algebroid_tensor_check(A, bracket)
        if not rep.ok:
            raise _report_error("A is not a Lie algebroid", rep)
    p, r = A.num_vars, A.rank
    Am = A.module
    if dull is None:
        dull = standard_dorfman(A)
    elif isinstance(dull, DorfmanConnection):
        dull = dorfman_to_dull(dull)
    Q = dull.module
    if Q.rank != p + r:
        raise DimensionError("the dull bracket must live on TM + A*")
    Qan, Qs = dull.base, Q.dual()
    delta = dull_to_dorfman(dull)
    rhoA = A.rho

    def core(theta, a) -> Section:          # (theta, a) in T*M + A  =  Q*
        return Qs.section(list(theta) + list(a))

    def side(X, alpha) -> Section:          # (X, alpha) in TM + A*  =  Q
        return Q.section(list(X) + list(alpha))

    def core_parts(t):
        return t[:p], t[p:]

    def side_parts(q):
        return q[:p], q[p:]

    dB = TensorMap.from_function((Qs,), Am, lambda t: core_parts(t)[1])
    nabla = Connection.tabulate(Qan, Am, lambda q, a: core_parts(delta(q, core([_zero(p)] * p, a)))[1])
    omega = TensorMap.from_function(
        (Q, Q, Q), Am.dual(), lambda a, b, c: side_parts(jacobiator(dull, a, b, c))[1], ALT3)
    lie2 = SplitLie2(Qan, Am, dB, dull, nabla, omega)

    def anchor_pair(t) -> Section:          # (rho, rho^*): Q* -> Q
        theta, a = core_parts(t)
        X = rhoA(a).components if p else ()
        return side(X, A.rho_star(theta))

    def Omega(q, a) -> Section:
        X, alpha = side_parts(q)
        val = Section(alpha).dot(a) if r else _zero(p)
        return delta(q, core([_zero(p)] * p, a)) - core(differential(val), [_zero(p)] * r)

    def lie_core(a, t) -> Section:          # ([a, b], L_{rho a} theta)
        theta, b = core_parts(t)
        return core(_lie_derivative_form(rhoA(a), theta) if p else (), bracket(a, b))

    def lie_side(a, q) -> Section:          # ([rho a, X], L_a alpha)
        X, alpha = side_parts(q)
        XY = rhoA(a).bracket(Derivation(X)).components if p else ()
        return side(XY, _lie_on_dual(A, bracket, a, alpha))

    def nb_side(a, q):
        return anchor_pair(Omega(q, a)) + lie_side(a, q)

    def nb_core(a, t):
        return Omega(anchor_pair(t), a) + lie_core(a, t)

    nablaQ = Connection.tabulate(A, Q, nb_side)
    nablaQstar = Connection.tabulate(A, Qs, nb_core)

    def Rbas(a, b, q):
        return (-Omega(q, bracket(a, b)) + lie_core(a, Omega(q, b)) - lie_core(b, Omega(q, a))
                + Omega(nb_side(b, q), a) - Omega(nb_side(a, q), b))

    R = TensorMap.from_function((Am, Am, Q), Qs, Rbas)
    dQ = TensorMap.from_function((Qs,), Q, anchor_pair)
    rep = SelfDual2Rep(A, bracket, Q, dQ, nablaQ, nablaQstar, R)
    return LACourantSplit(lie2, rep)


def tangent_double_matched_pair(A: AnchoredBundle, bracket: DullBracket,
                                conn: Connection | None = None) -> MatchedPair2Reps:
    """Matched pair of 2-representations describing the tangent double TA,
    split by a TM-connection on A: A acts on rho: A -> TM by the basic
    connections and basic curvature, TM acts on Id: A -> A by (nabla, nabla, R_nabla).
    Sides A and TM, core A."""
    p = A.num_vars
    Am = A.module
    T = AnchoredBundle.tangent(p)
    TMm = T.module
    brT = DullBracket.zero(T)
    conn = conn or flat_connection(T, Am)
    rho = A.rho
    C = FreeModule("C", Am.rank, p)

    def as_C(a):
        return C.section(a)

    nb_core = Connection.tabulate(A, C, lambda a, c: bracket(a, c) + conn(rho(c).components, a))
    nb_side = Connection.tabulate(
        A, TMm, lambda a, X: (rho(a).bracket(Derivation(X)) + rho(conn(X, a))).components)

    def Rbas(a1, a2, X):
        return (-conn(X, bracket(a1, a2)) + bracket(conn(X, a1), a2) + bracket(a1, conn(X, a2))
                + conn(nb_side(a2, X), a1) - conn(nb_side(a1, X), a2))

    RA = TensorMap.from_function((Am, Am, TMm), C, lambda a1, a2, X: as_C(Rbas(a1, a2, X)), ALT2)
    Rn = curvature(conn, brT)
    RB = TensorMap.from_function((TMm, TMm, Am), C, lambda X, Y, a: as_C(Rn(X, Y, a)), ALT2)
    dA = TensorMap.identity(Am)
    dA = TensorMap((C,), Am, dA.coeffs)
    dB = TensorMap.from_function((C,), TMm, lambda c: rho(c).components)
    B_on_C = Connection(T, C, conn.table)
    return MatchedPair2Reps(A, bracket, T, brT, C, dA, dB,
                            A_on_B=nb_side, A_on_C=nb_core, RA=RA,
                            B_on_A=conn, B_on_C=B_on_C, RB=RB)


def la_courant_from_matched_2reps(mp: MatchedPair2Reps, validate: bool = True) -> LACourantSplit:
    """LA-Courant data on Q = A + C* (A first) over the side B.  The core Q*
    is ordered (A*, C).

    Lie 2 side: d_B o pr_C, the Dorfman connection
    Delta_{(a, gamma)}(alpha, c) = (L_a alpha + <nabla*_. gamma, c>, nabla_a c),
    nabla_{(a, gamma)} b = nabla_a b and
    omega((a1, g1), (a2, g2), (a3, g3)) = <g3, R(a1, a2)> + <g1, R(a2, a3)> + <g2, R(a3, a1)>.
    Representation side: (d_A + d_A^*, nabla^A + nabla^{C*}, nabla^C + nabla^{A*}, R + (-R^*)).
    """
    if validate:
        rep = check_matched_m(mp)
        if not rep.ok:
            raise _report_error("matched pair of 2-representations", rep)
    A, B, C = mp.A, mp.B, mp.C
    Am, Bm = A.module, B.module
    p, ra, rc = A.num_vars, Am.rank, C.rank
    Q = FreeModule("A+C*", ra + rc, p)
    Qs = Q.dual()
    Qan = AnchoredBundle(Q, list(A.anchor) + [Derivation.zero(p)] * rc)
    brA = mp.bracketA
    AC_dual = mp.A_on_C.dual()       # A-connection on C*
    BC_dual = mp.B_on_C.dual()       # B-connection on C*
    BA_dual = mp.B_on_A.dual()       # B-connection on A*

    def side_parts(q):
        return q[:ra], q[ra:]

    def core_parts(t):
        return t[:ra], t[ra:]

    def side(a, g) -> Section:
        return Q.section(list(a) + list(g))

    def core(al, c) -> Section:
        return Qs.section(list(al) + list(c))

    def Delta(q, t):
        a, g = side_parts(q)
        al, c = core_parts(t)
        corr = Am.dual().section(AC_dual(e, g).dot(c) for e in Am.frames())
        return core(_lie_on_dual(A, brA, a, al) + corr, mp.A_on_C(a, c))

    delta = DorfmanConnection.tabulate(Qan, Delta)
    dull = dorfman_to_dull(delta)
    dB = TensorMap.from_function((Qs,), Bm, lambda t: mp.dB(core_parts(t)[1]))
    nabla = Connection.tabulate(Qan, Bm, lambda q, b: mp.A_on_B(side_parts(q)[0], b))
    RA = mp.RA

    def omega_fn(q1, q2, q3):
        (a1, g1), (a2, g2), (a3, g3) = side_parts(q1), side_parts(q2), side_parts(q3)
        return Bm.dual().section(
            (Section(g3).dot(RA(a1, a2, b)) + Section(g1).dot(RA(a2, a3, b)) + Section(g2).dot(RA(a3, a1, b)))
            for b in Bm.frames())

    omega = TensorMap.from_function((Q, Q, Q), Bm.dual(), omega_fn, ALT3)
    lie2 = SplitLie2(Qan, Bm, dB, dull, nabla, omega)

    def dQ_fn(t):
        al, c = core_parts(t)
        return side(mp.dA(c), mp.dA.transpose()(al))

    def nQ(b, q):
        a, g = side_parts(q)
        return side(mp.B_on_A(b, a), BC_dual(b, g))

    def nQs(b, t):
        al, c = core_parts(t)
        return core(BA_dual(b, al), mp.B_on_C(b, c))

    RB = mp.RB

    def R_fn(b1, b2, q):
        a, g = side_parts(q)
        minus_dual = Am.dual().section(-Section(g).dot(RB(b1, b2, e)) for e in Am.frames())
        return core(minus_dual, RB(b1, b2, a))

    dQ = TensorMap.from_function((Qs,), Q, dQ_fn)
    nablaQ = Connection.tabulate(B, Q, nQ)
    nablaQstar = Connection.tabulate(B, Qs, nQs)
    R = TensorMap.from_function((Bm, Bm, Q), Qs, R_fn, ALT2)
    rep = SelfDual2Rep(B, mp.bracketB, Q, dQ, nablaQ, nablaQstar, R)
    return LACourantSplit(lie2, rep)


# -- the core degenerate Courant algebroid --------------------------------

def _constant_gram(dQ: TensorMap) -> list[list[Fraction]]:
    n = dQ.output.rank
    gram = [[Fraction(0)] * n for _ in range(n)]
    for (j, i), c in dQ.coeffs.items():
        if not c.is_constant():
            raise PreconditionError("the core pairing needs a constant d_Q; got a polynomial entry "
                                    f"at ({i}, {j}): {c}")
        gram[i][j] = c.constant_term()
    return gram


def core_degenerate_courant(S: LACourantSplit, assume_valid: bool = False,
                            checker: Checker | None = None) -> CourantData:
    """Degenerate Courant algebroid on the core Q*: anchor rho_Q d_Q,
    D = rho_Q^* d, pairing <t1, d_Q t2> and bracket
    [[t1, t2]] = Delta_{d_Q t1} t2 - nabla*_{d_B t2} t1.

    Unless ``assume_valid``, the LA-Courant checks are run first and a
    failure raises PreconditionError."""
    if not assume_valid:
        rep = check_la_courant(S, checker)
        if not rep.ok:
            raise _report_error("not an LA-Courant algebroid", rep)
    L, P = S.lie2, S.rep
    Qs = S.Q.dual()
    p = S.num_vars
    rhoQ = L.Q.rho
    anchor = [rhoQ(P.dQ(t)) for t in Qs.frames()]
    Qc = AnchoredBundle(Qs, anchor)
    gram = _constant_gram(P.dQ)
    try:
        g = Metric(Qs, gram)
    except ValueError as exc:
        raise PreconditionError(f"d_Q is not symmetric: {exc}") from exc
    Dmap = TensorMap((cotangent(p),), Qs,
                     {(a, i): X.components[a] for i, X in enumerate(L.Q.anchor) for a in range(p)})
    delta, nabQs, dQ, dB = L.delta, P.nablaQstar, P.dQ, L.dB

    def br(t1, t2):
        return delta(dQ(t1), t2) - nabQs(dB(t2), t1)

    frames = Qs.frames()
    table = {(i, j): br(frames[i], frames[j]) for i in range(Qs.rank) for j in range(Qs.rank)}
    return CourantData(Qc, g, table, Dmap=Dmap)


def check_core_courant(S: LACourantSplit, core: CourantData | None = None,
                       checker: Checker | None = None) -> CheckReport:
    """Degenerate Courant axioms of the core together with the identities
    tying it to the LA-Courant data: d_B is a bracket and anchor morphism,
    d_Q intertwines the brackets up to d_B^*, the basic-curvature identity,
    [[rho^* df, t]] = 0, and agreement of the tabulated bracket with the
    defining formula on non-frame sections."""
    checker = checker or Checker()
    core = core or core_degenerate_courant(S, assume_valid=True)
    L, P = S.lie2, S.rep
    Q, Qs, B = S.Q, S.Q.dual(), S.B
    delta, nabQs, nabQ = L.delta, P.nablaQstar, P.nablaQ
    dQ, dB, dBs, brB, dull = P.dQ, L.dB, L.dB_star, P.bracket, L.dull
    rho_star_d = L.Q.rho_star_d
    report = check_courant(core, require_nondegenerate=False, checker=checker)
    report.add(checker.identity(
        "bracket_formula", (Qs, Qs),
        lambda t1, t2: core(t1, t2) - (delta(dQ(t1), t2) - nabQs(dB(t2), t1))))
    report.add(checker.identity(
        "partial_B_morphism", (Qs, Qs), lambda t1, t2: dB(core(t1, t2)) - brB(dB(t1), dB(t2))))
    report.add(checker.identity(
        "partial_B_anchor", (Qs,), lambda t: P.B.rho(dB(t)) - core.E.rho(t)))

    def preserves(t1, t2):
        beta = B.dual().section(t2.dot(nabQ(b, dQ(t1))) for b in B.frames())
        return dQ(core(t1, t2)) - dull(dQ(t1), dQ(t2)) - dBs(beta)

    report.add(checker.identity("partial_Q_preserves", (Qs, Qs), preserves))

    def basic(q, t1, t2):
        n2, n1 = nabQ(dB(t2), q), nabQ(dB(t1), q)
        rhs = (-delta(q, core(t1, t2)) + core(delta(q, t1), t2) + core(t1, delta(q, t2))
               + delta(n2, t1) - delta(n1, t2) - rho_star_d(t1.dot(n2)))
        return P.R(dB(t1), dB(t2), q) - rhs

    report.add(checker.identity("bracket_on_Q*_basic", (Q, Qs, Qs), basic))
    report.add(checker.identity(
        "bracket_pullback", (Functions(S.num_vars), Qs), lambda f, t: core(rho_star_d(f), t)))
    return report


def transport_core(core: CourantData, g: Metric):
    """The core bracket moved to Q along d_Q = g^{-1}, as a function; used to
    compare with the Courant algebroid a tangent prolongation started from."""
    return lambda e1, e2: g.raise_(core(g.lower(e1), g.lower(e2)))


# -- changes of Lagrangian splitting ---------------------------------------

class SplittingChange:
    """phi in Gamma(Q* wedge Q* x B*), stored as an alternating map
    (Q, Q) -> B*.  phi(b, q) denotes the Q*-section q' -> <phi(q, q'), b>."""

    def __init__(self, phi: TensorMap):
        if phi.arity != 2 or not same_module(phi.inputs[0], phi.inputs[1]):
            raise DimensionError("phi takes two Q arguments")
        self.phi = phi.with_symmetry(ALT2)

    @property
    def Q(self) -> FreeModule:
        return self.phi.inputs[0]

    @property
    def B(self) -> FreeModule:
        return self.phi.output.dual()

    @classmethod
    def zero(cls, Q: FreeModule, B: FreeModule) -> "SplittingChange":
        return cls(TensorMap.zero((Q, Q), B.dual(), ALT2))

    @classmethod
    def random(cls, Q: FreeModule, B: FreeModule, checker: Checker, density: int = 2) -> "SplittingChange":
        coeffs = {}
        pairs = list(combinations(range(Q.rank), 2))
        for _ in range(density):
            if not pairs or not B.rank:
                break
            i, j = checker.rng.choice(pairs)
            k = checker.rng.randrange(B.rank)
            c = checker.random_poly(Q.num_vars, degree=1, terms=2)
            coeffs[(i, j, k)] = coeffs.get((i, j, k), Poly.zero(Q.num_vars)) + c
            coeffs[(j, i, k)] = -coeffs[(i, j, k)]
        return cls(TensorMap((Q, Q), B.dual(), coeffs, ALT2))

    def __call__(self, q1, q2) -> Section:
        return self.phi(q1, q2)

    def on_b(self, b, q) -> Section:
        Q = self.Q
        return Q.dual().section(self.phi(q, e).dot(b) for e in Q.frames())


class SplittingChangeResult:
    """Transformed connection on the core, Dorfman connection and dull bracket,
    with the report of the invariance checks."""

    def __init__(self, nablaQstar: Connection, delta: DorfmanConnection, dull: DullBracket,
                 report: CheckReport):
        self.nablaQstar = nablaQstar
        self.nablaQ = nablaQstar.dual()
        self.delta = delta
        self.dull = dull
        self.report = report

    def core_bracket(self, S: LACourantSplit):
        dQ, dB = S.rep.dQ, S.lie2.dB
        return lambda t1, t2: self.delta(dQ(t1), t2) - self.nablaQstar(dB(t2), t1)


def apply_splitting_change(S: LACourantSplit, phi: SplittingChange,
                           checker: Checker | None = None) -> SplittingChangeResult:
    """nabla2_b t = nabla1_b t + phi(b, d_Q t), Delta2_q t = Delta1_q t + phi(d_B t, q),
    [[q, q']]_2 = [[q, q']]_1 - d_B^* phi(q, q').  The report checks that
    Delta2 is dual to the new bracket and that the core bracket is unchanged."""
    checker = checker or Checker()
    L, P = S.lie2, S.rep
    Q, Qs = S.Q, S.Q.dual()
    if not (same_module(phi.Q, Q) and same_module(phi.B, S.B)):
        raise DimensionError("phi does not match the splitting's Q and B")
    dQ, dB, dBs = P.dQ, L.dB, L.dB_star
    nab2 = Connection.tabulate(P.B, Qs, lambda b, t: P.nablaQstar(b, t) + phi.on_b(b, dQ(t)))
    delta2 = DorfmanConnection.tabulate(L.Q, lambda q, t: L.delta(q, t) + phi.on_b(dB(t), q))
    frames = Q.frames()
    dull2 = DullBracket(L.Q, {(i, j): L.dull(frames[i], frames[j]) - dBs(phi(frames[i], frames[j]))
                              for i in range(Q.rank) for j in range(Q.rank) if i != j})
    result = SplittingChangeResult(nab2, delta2, dull2, CheckReport())
    dual2 = dull_to_dorfman(dull2)
    result.report.add(checker.identity("dorfman_dual", (Q, Qs), lambda q, t: dual2(q, t) - delta2(q, t)))
    old = S.lie2.delta
    new_core = result.core_bracket(S)
    result.report.add(checker.identity(
        "core_bracket_invariant", (Qs, Qs),
        lambda t1, t2: new_core(t1, t2) - (old(dQ(t1), t2) - P.nablaQstar(dB(t2), t1))))
    return result


# -- the Manin pair of an LA-Dirac structure ----------------------------------

class ManinPairData:
    """B = (U + Q*) / graph(-d_Q on U°), presented on representatives.

    Representatives live in the free module ``W`` with U-coordinates first,
    then Q*-coordinates.  ``relations`` spans the graph; the quotient ``Bbb``
    has the frame given by ``complement``, and ``reduce`` is the constant
    projection along the graph onto that frame.
    """

    def __init__(self, S: LACourantSplit, U: SubBundle):
        from .dirac import Coordinates
        P = S.rep
        self.S, self.U = S, U
        self.coordsU = Coordinates(U, "U")
        self.Um = self.coordsU.module
        self.Qs = S.Q.dual()
        r, n, p = U.rank, S.Q.rank, S.num_vars
        self.W = FreeModule("U+Q*", r + n, p)
        relations = []
        for tau in annihilator(U).sections():
            c = U.coordinates(P.dQ(tau))
            if c is None:
                raise PreconditionError("d_Q does not map U° into U")
            if not all(v.is_constant() for v in c):
                raise PreconditionError("the Manin pair needs d_Q constant on U°")
            relations.append([-v.constant_term() for v in c] + [v.constant_term() for v in tau])
        self.relations = SubBundle(self.W, relations)
        self.complement = complement_basis(self.relations)
        self.Bbb = FreeModule("B", len(self.complement), p)
        rows = [list(v) for v in self.complement] + [list(v) for v in self.relations.basis]
        self._inv = rational_inverse(rows)
        self.courant = self._build()

    # representatives
    def split(self, w: Sequence[Poly]) -> tuple[Section, Section]:
        r = self.U.rank
        return Section(w[:r]), Section(w[r:])

    def join(self, s: Sequence[Poly], tau: Sequence[Poly]) -> Section:
        return Section(list(s) + list(tau))

    def reduce(self, w: Sequence[Poly]) -> Section:
        k = self.Bbb.rank
        p = self.W.num_vars
        out = []
        for j in range(k):
            acc = Poly.zero(p)
            for i, c in enumerate(w):
                v = self._inv[i][j]
                if c and v:
                    acc = acc + c.scale(v)
            out.append(acc)
        return Section(out) if out else self.Bbb.zero()

    def lift(self, b: Sequence[Poly]) -> Section:
        out = list(self.W.zero())
        for c, v in zip(b, self.complement):
            if c:
                out = [o + c.scale(x) if x else o for o, x in zip(out, v)]
        return Section(out)

    def iota(self, s: Sequence[Poly]) -> Section:
        return self.reduce(self.join(s, self.Qs.zero()))

    def psi(self, tau: Sequence[Poly]) -> Section:
        return self.reduce(self.join(self.Um.zero(), tau))

    def core_bracket(self, t1, t2) -> Section:
        L, P = self.S.lie2, self.S.rep
        return L.delta(P.dQ(t1), t2) - P.nablaQstar(L.dB(t2), t1)

    def anchor_w(self, w) -> Derivation:
        s, tau = self.split(w)
        return self.S.lie2.Q.rho(self.coordsU.lift(s) + self.S.rep.dQ(tau))

    def pair_w(self, w1, w2) -> Poly:
        (s1, t1), (s2, t2) = self.split(w1), self.split(w2)
        lu = self.coordsU.lift
        return lu(s1).dot(t2) + lu(s2).dot(t1) + t1.dot(self.S.rep.dQ(t2))

    def bracket_w(self, w1, w2) -> Section:
        L, P = self.S.lie2, self.S.rep
        (s1, t1), (s2, t2) = self.split(w1), self.split(w2)
        lu = self.coordsU.lift
        u1, u2 = lu(s1), lu(s2)
        upart = L.dull(u1, u2) + P.nablaQ(L.dB(t1), u2) - P.nablaQ(L.dB(t2), u1)
        c = self.U.coordinates(upart)
        if c is None:
            raise PreconditionError("the bracket leaves U; D is not LA-Dirac")
        qpart = (self.core_bracket(t1, t2) + L.delta(u1, t2) - L.delta(u2, t1)
                 + L.Q.rho_star_d(t1.dot(u2)))
        return self.join(c, qpart)

    def _build(self) -> CourantData:
        Bm = self.Bbb
        frames = [self.lift(b) for b in Bm.frames()]
        anchor = [self.anchor_w(w) for w in frames]
        gram = []
        for w1 in frames:
            row = []
            for w2 in frames:
                v = self.pair_w(w1, w2)
                if not v.is_constant():
                    raise PreconditionError("the quotient pairing is not constant")
                row.append(v.constant_term())
            gram.append(row)
        table = {(i, j): self.reduce(self.bracket_w(frames[i], frames[j]))
                 for i in range(Bm.rank) for j in range(Bm.rank)}
        return CourantData(AnchoredBundle(Bm, anchor), Metric(Bm, gram), table)


def manin_pair(S: LACourantSplit, D, checker: Checker | None = None,
               validate: bool = True) -> tuple[ManinPairData, CheckReport]:
    """The Courant algebroid B with U as Dirac structure, and the morphism
    psi: Q* -> B.  The report covers well-definedness on the quotient, the
    Courant axioms of B, the Dirac property of U and the conditions relating
    B, U and the core."""
    from .dirac import check_la_dirac
    checker = checker or Checker()
    if validate:
        pre = check_la_dirac(S, D, checker, double=False)
        if not pre.ok:
            raise _report_error("D is not LA-Dirac", pre)
    mp = ManinPairData(S, D.U)
    B = mp.courant
    W, Bm, Um, Qs = mp.W, mp.Bbb, mp.Um, mp.Qs
    G = FreeModule("graph", mp.relations.rank, S.num_vars)

    def lg(c):
        out = list(W.zero())
        for x, v in zip(c, mp.relations.basis):
            if x:
                out = [o + x.scale(y) if y else o for o, y in zip(out, v)]
        return Section(out)

    report = CheckReport()
    report.add(checker.identity("anchor_well_defined", (G,), lambda g: mp.anchor_w(lg(g))))
    report.add(checker.identity("pairing_well_defined", (G, W), lambda g, w: mp.pair_w(lg(g), w)))
    report.add(checker.identity("bracket_well_defined_left", (G, W),
                                lambda g, w: mp.reduce(mp.bracket_w(lg(g), w))))
    report.add(checker.identity("bracket_well_defined_right", (W, G),
                                lambda w, g: mp.reduce(mp.bracket_w(w, lg(g)))))
    report.add(checker.identity("bracket_formula", (Bm, Bm),
                                lambda a, b: B(a, b) - mp.reduce(mp.bracket_w(mp.lift(a), mp.lift(b)))))
    report.extend(check_courant(B, require_nondegenerate=True, checker=checker))
    rho_star_d = S.lie2.Q.rho_star_d
    report.add(checker.identity("D_formula", (Functions(S.num_vars),),
                                lambda f: B.D(f) - mp.psi(rho_star_d(f))))
    iota_img = SubBundle(Bm, [[c.constant_term() for c in mp.iota(u)] for u in Um.frames()])
    report.add(_rank_entry("U_lagrangian", 2 * Um.rank, Bm.rank, S.num_vars))
    report.add(checker.identity("U_isotropic", (Um, Um), lambda a, b: B.pair(mp.iota(a), mp.iota(b))))
    report.add(checker.identity("U_involutive", (Um, Um), lambda a, b: iota_img.residual(B(mp.iota(a), mp.iota(b)))))
    report.add(checker.identity("psi_bracket", (Qs, Qs),
                                lambda t1, t2: mp.psi(mp.core_bracket(t1, t2)) - B(mp.psi(t1), mp.psi(t2))))
    report.add(checker.identity("psi_anchor", (Qs,),
                                lambda t: B.E.rho(mp.psi(t)) - S.lie2.Q.rho(S.rep.dQ(t))))
    report.add(checker.identity("psi_pairing", (Qs, Qs),
                                lambda t1, t2: B.pair(mp.psi(t1), mp.psi(t2)) - t1.dot(S.rep.dQ(t2))))
    lu = mp.coordsU.lift
    report.add(checker.identity("iota_anchor", (Um,), lambda a: S.lie2.Q.rho(lu(a)) - B.E.rho(mp.iota(a))))
    spans = [[c.constant_term() for c in mp.psi(t)] for t in Qs.frames()] + [list(v) for v in iota_img.basis]
    report.add(_rank_entry("psi_plus_U_spans", rational_rank(spans) if spans else 0, Bm.rank, S.num_vars))
    report.add(checker.identity("psi_U_pairing", (Qs, Um),
                                lambda t, a: B.pair(mp.psi(t), mp.iota(a)) - lu(a).dot(t)))
    return mp, report


def _rank_entry(axiom: str, got: int, want: int, p: int) -> CheckEntry:
    if got == want:
        return CheckEntry(axiom, True)
    return CheckEntry(axiom, False, witness_for(Poly.const(want - got, p), ()))
