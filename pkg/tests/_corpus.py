"""Instance builders shared by the test modules."""
from __future__ import annotations

import random
from fractions import Fraction

from lakit.basering import Derivation, Poly, variables
from lakit.calculus import AnchoredBundle, Connection, DullBracket, scalar_form
from lakit.constructions import (ALT2, ALT3, la_courant_from_matched_2reps, make_exact_courant,
                                 standard_dorfman, standard_la_courant_over_lie_algebroid,
                                 tangent_double_matched_pair, tangent_prolongation_la_courant)
from lakit.dirac import DoubleSubbundleData
from lakit.linalg import FreeModule, SubBundle, TensorMap, trivial_line
from lakit.report import Checker
from lakit.structures import LACourantSplit, MatchedPair2Reps, SelfDual2Rep, SplitLie2


def exact(p: int, c: Fraction | int = 0) -> object:
    """TM + T*M over R^p; for p = 3 a constant flux c dx1 dx2 dx3."""
    if not c:
        return make_exact_courant(p)
    return make_exact_courant(p, scalar_form(FreeModule("TM", p, p), 3, {(0, 1, 2): Fraction(c)}))


def coordinate_connection(E, gamma) -> Connection:
    """Metric TM-connection on TM + T*M: nabla_a d_j = sum_k gamma[a][j][k] d_k and
    the dual action on 1-forms."""
    p = E.module.num_vars
    T = AnchoredBundle.tangent(p)
    z = Poly.zero(p)
    table = {}
    for a in range(p):
        for j in range(p):
            table[(a, j)] = [gamma[a][j][k] for k in range(p)] + [z] * p
            table[(a, p + j)] = [z] * p + [-gamma[a][k][j] for k in range(p)]
    return Connection(T, E.module, table)


def random_metric_connection(E, rng: random.Random, checker: Checker, density: float = 0.4) -> Connection:
    p = E.module.num_vars
    gamma = [[[checker.random_poly(p, 1, 1) if rng.random() < density else Poly.zero(p)
               for _ in range(p)] for _ in range(p)] for _ in range(p)]
    return coordinate_connection(E, gamma)


def flux_adapted_connection(E, H: TensorMap) -> Connection:
    """nabla_X d_a = sum_b H(d_a, d_b, X) dx^b: flat, metric, and preserves TM only when H = 0."""
    p = E.module.num_vars
    T = AnchoredBundle.tangent(p)
    TM = T.module
    z = Poly.zero(p)
    table = {(X, a): [z] * p + [H(TM.frame(a), TM.frame(b), TM.frame(X))[0] for b in range(p)]
             for X in range(p) for a in range(p)}
    return Connection(T, E.module, table)


def tangent_frames(E) -> SubBundle:
    p = E.module.num_vars
    return SubBundle(E.module, [[int(i == j) for j in range(2 * p)] for i in range(p)])


def line_algebroid() -> tuple[AnchoredBundle, DullBracket]:
    """TR^1 as a Lie algebroid."""
    A = AnchoredBundle(FreeModule("A", 1, 1), [Derivation([Poly.one(1)])])
    return A, DullBracket(A, {})


def rank2_algebroid() -> tuple[AnchoredBundle, DullBracket]:
    """Rank 2 over R^1: rho(e1) = d/dx, rho(e2) = x d/dx, [e1, e2] = e1."""
    x = variables(1)[0]
    A = AnchoredBundle(FreeModule("A", 2, 1), [Derivation([Poly.one(1)]), Derivation([x])])
    return A, DullBracket(A, {(0, 1): [Poly.one(1), Poly.zero(1)]})


def rank2_connection(A: AnchoredBundle) -> Connection:
    x = variables(1)[0]
    T = AnchoredBundle.tangent(1)
    return Connection(T, A.module, {(0, 0): [x, Poly.const(2, 1)], (0, 1): [Poly.zero(1), x * x]})


def zero_split(p: int, nQ: int, nB: int) -> LACourantSplit:
    Q = AnchoredBundle.zero_anchor(FreeModule("Q", nQ, p))
    Bm = FreeModule("B", nB, p)
    B = AnchoredBundle.zero_anchor(Bm)
    Qm, Qs = Q.module, Q.module.dual()
    lie2 = SplitLie2(Q, Bm, TensorMap.zero((Qs,), Bm), DullBracket.zero(Q), Connection.zero(Q, Bm),
                     TensorMap.zero((Qm,) * 3, Bm.dual(), ALT3))
    rep = SelfDual2Rep(B, DullBracket.zero(B), Qm, TensorMap.zero((Qs,), Qm), Connection.zero(B, Qm),
                       Connection.zero(B, Qs), TensorMap.zero((Bm, Bm, Qm), Qs, ALT2))
    return LACourantSplit(lie2, rep)


def valid_corpus() -> list[tuple[str, LACourantSplit]]:
    """Valid LA-Courant data from all three families, kept small for speed."""
    out = [("zero", zero_split(1, 2, 1))]
    out.append(("tangent p=1", tangent_prolongation_la_courant(exact(1))))
    E2 = exact(2)
    out.append(("tangent p=2", tangent_prolongation_la_courant(E2)))
    out.append(("tangent p=2 nonflat", tangent_prolongation_la_courant(
        E2, random_metric_connection(E2, random.Random(1), Checker(1), 0.5))))
    A1, b1 = line_algebroid()
    out.append(("standard TR", standard_la_courant_over_lie_algebroid(A1, b1)))
    A2, b2 = rank2_algebroid()
    out.append(("standard A2", standard_la_courant_over_lie_algebroid(A2, b2)))
    out.append(("from-matched A2", la_courant_from_matched_2reps(tangent_double_matched_pair(A2, b2))))
    out.append(("from-matched A2 nonflat", la_courant_from_matched_2reps(
        tangent_double_matched_pair(A2, b2, rank2_connection(A2)))))
    return out


def standard_with_connection():
    A2, b2 = rank2_algebroid()
    return standard_la_courant_over_lie_algebroid(A2, b2, standard_dorfman(A2, rank2_connection(A2)))


def anchor_compatible_bracket(rng: random.Random, checker: Checker) -> DullBracket:
    """Random dull bracket satisfying rho[[a, b]] = [rho a, rho b].

    Three shapes: zero anchor with arbitrary structure functions; anchors
    g_i X along one vector field X with g_0 = 1, solving for the e_0 component;
    TM + K with the projection anchor, Lie bracket plus arbitrary K-parts.
    """
    shape = rng.randrange(3)
    p = rng.randint(1, 2)
    rp = lambda: checker.random_poly(p, 2, 2) if rng.random() < 0.6 else Poly.zero(p)  # noqa: E731
    if shape == 0:
        n = rng.randint(2, 3)
        A = AnchoredBundle.zero_anchor(FreeModule("Q", n, p))
        return DullBracket(A, {(i, j): [rp() for _ in range(n)] for i in range(n) for j in range(i + 1, n)})
    if shape == 1:
        n = rng.randint(2, 3)
        X = Derivation([checker.random_poly(p, 1, 2) for _ in range(p)])
        g = [Poly.one(p)] + [checker.random_poly(p, 1, 2) for _ in range(n - 1)]
        A = AnchoredBundle(FreeModule("Q", n, p), [X * gi for gi in g])
        table = {}
        for i in range(n):
            for j in range(i + 1, n):
                c = [Poly.zero(p)] + [rp() for _ in range(n - 1)]
                c[0] = g[i] * X(g[j]) - g[j] * X(g[i]) - sum((c[k] * g[k] for k in range(1, n)), Poly.zero(p))
                table[(i, j)] = c
        return DullBracket(A, table)
    k = rng.randint(1, 2)
    n = p + k
    A = AnchoredBundle(FreeModule("Q", n, p), [Derivation.partial(a, p) for a in range(p)] + [Derivation.zero(p)] * k)
    table = {}
    for i in range(n):
        for j in range(i + 1, n):
            table[(i, j)] = [Poly.zero(p)] * p + [rp() for _ in range(k)]
    return DullBracket(A, table)


def random_dull_bracket(rng: random.Random, checker: Checker) -> DullBracket:
    """Random anchor and structure functions; anchor compatibility typically fails."""
    p = rng.randint(1, 2)
    n = rng.randint(2, 3)
    anchor = [Derivation([checker.random_poly(p, 1, 2) for _ in range(p)]) for _ in range(n)]
    A = AnchoredBundle(FreeModule("Q", n, p), anchor)
    return DullBracket(A, {(i, j): [checker.random_poly(p, 1, 2) for _ in range(n)]
                           for i in range(n) for j in range(i + 1, n)})


def line(p: int) -> FreeModule:
    return trivial_line(p)


def perturb(T: TensorMap, key: tuple, c: Poly) -> TensorMap:
    """T plus c at ``key``, with the partner entries its symmetry tags force."""
    coeffs = {tuple(key): c}
    todo = [tuple(key)]
    while todo:
        k = todo.pop()
        for kind, a, b in T.symmetry:
            sw = list(k)
            sw[a], sw[b] = sw[b], sw[a]
            sw = tuple(sw)
            if sw not in coeffs:
                coeffs[sw] = coeffs[k] if kind == "sym" else -coeffs[k]
                todo.append(sw)
    return T + TensorMap(T.inputs, T.output, coeffs, T.symmetry)


def single_tensor_mutations(S: LACourantSplit) -> list[tuple[str, LACourantSplit]]:
    """One perturbed structure tensor at a time, where the ranks allow it."""
    p = S.num_vars
    L, P = S.lie2, S.rep
    nQ, nB = S.Q.rank, S.B.rank
    c = Poly.var(0, p) + 1 if p else Poly.const(2, 0)
    out = [("dB", S.replace(lie2=L.replace(dB=perturb(L.dB, (0, 0), c)))),
           ("dQ", S.replace(rep=P.replace(dQ=perturb(P.dQ, (0, 0), c))))]
    if nQ >= 3:
        out.append(("omega", S.replace(lie2=L.replace(omega=perturb(L.omega, (0, 1, 2, 0), c)))))
    if nB >= 2:
        out.append(("R", S.replace(rep=P.replace(R=perturb(P.R, (0, 1, 0, min(1, nQ - 1)), c)))))
    return out


def _lie2(p: int, nQ: int, nB: int, anchor=None, bracket=None, dB=None, nabla=None, omega=None) -> SplitLie2:
    Qm, Bm = FreeModule("Q", nQ, p), FreeModule("B", nB, p)
    Q = AnchoredBundle(Qm, anchor) if anchor else AnchoredBundle.zero_anchor(Qm)
    w = TensorMap.zero((Qm,) * 3, Bm.dual(), ALT3)
    for key, c in (omega or {}).items():
        w = perturb(w, key, c)
    return SplitLie2(Q, Bm, TensorMap((Qm.dual(),), Bm, dB or {}), DullBracket(Q, bracket or {}),
                     Connection(Q, Bm, nabla or {}), w)


def condition_mutants() -> dict[str, SplitLie2]:
    """For each of (i)-(v) a split Lie 2-algebroid breaking that condition alone."""
    one0 = Poly.one(0)
    x = variables(1)[0]
    o = Poly.zero(1)
    out = {}
    # d_B^* beta1 = e0 and nabla*_{e0} beta1 = beta2, so nabla_{e0} b2 = -b1
    out["(i)"] = _lie2(0, 1, 2, dB={(0, 0): one0}, nabla={(0, 1): [-one0, Poly.zero(0)]})
    # d_B^* beta = e1 while nabla_{e0} b = b
    out["(ii)"] = _lie2(0, 2, 1, dB={(1, 0): one0}, nabla={(0, 0): [one0]})
    # structure constants with a nonzero Jacobiator, omega = 0
    z0 = Poly.zero(0)
    out["(iii)"] = _lie2(0, 3, 1, bracket={(0, 1): [one0, z0, z0], (1, 2): [z0, one0, z0]})
    # flat-looking connection whose curvature is b
    out["(iv)"] = _lie2(1, 2, 1, anchor=[Derivation([Poly.one(1)]), Derivation([x])],
                        bracket={(0, 1): [Poly.one(1), o]}, nabla={(1, 0): [x]})
    # omega = x eps1 eps2 eps3 b* is not closed along rho(e0) = d/dx
    z1 = Derivation.zero(1)
    out["(v)"] = _lie2(1, 4, 1, anchor=[Derivation([Poly.one(1)]), z1, z1, z1], omega={(1, 2, 3, 0): x})
    return out


def conn_perturb(c: Connection, key, k, v) -> Connection:
    t = dict(c.table)
    s = list(t.get(key, c.on.zero()))
    s[k] = s[k] + v
    t[key] = s
    return Connection(c.acting, c.on, t)


def tangent_double_plane():
    p = 2
    x = variables(p)
    T = AnchoredBundle.tangent(p)
    A = AnchoredBundle(FreeModule("A", 2, p), T.anchor)
    conn = Connection(T, A.module, {(0, 0): [x[1], Poly.zero(p)], (1, 1): [Poly.zero(p), x[0]]})
    return tangent_double_matched_pair(A, DullBracket.zero(A), conn)


def matched_lie_algebras():
    """C = 0, rank 1 abelian A and B, A acting on B by the identity."""
    A = AnchoredBundle.zero_anchor(FreeModule("A", 1, 0))
    B = AnchoredBundle.zero_anchor(FreeModule("B", 1, 0))
    C = FreeModule("C", 0, 0)
    one = Poly.one(0)
    return MatchedPair2Reps(
        A, DullBracket.zero(A), B, DullBracket.zero(B), C,
        TensorMap((C,), A.module), TensorMap((C,), B.module),
        Connection(A, B.module, {(0, 0): [one]}), Connection.zero(A, C),
        TensorMap((A.module, A.module, B.module), C, {}, ALT2),
        Connection.zero(B, A.module), Connection.zero(B, C),
        TensorMap((B.module, B.module, A.module), C, {}, ALT2))


def dirac_instance(H_coeff=None, adapted=False):
    """Tangent prolongation of TR^3 + T*R^3 with flux H_coeff dx1 dx2 dx3 and U = TM."""
    p = 3
    if H_coeff is None:
        E = make_exact_courant(p)
        H = None
    else:
        H = scalar_form(FreeModule("TM", p, p), 3, {(0, 1, 2): H_coeff})
        E = make_exact_courant(p, H)
    conn = flux_adapted_connection(E, H) if adapted and H is not None else None
    S = tangent_prolongation_la_courant(E, conn)
    U = tangent_frames(E)
    return E, S, DoubleSubbundleData.lagrangian(U, SubBundle.full(S.B))
