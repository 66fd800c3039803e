"""Double subbundles of decomposed metric double vector bundles.

A double subbundle D is presented, relative to the splitting carried by the
ambient data, by its side U in Q, its side B' in B and its core K in Q*.
All three are constant subbundles; Gamma-level membership statements are
checked on frames and on random polynomial multiples of frames.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .basering import Derivation, Poly
from .calculus import AnchoredBundle, Connection, DullBracket, curvature
from .constructions import (ALT2, PreconditionError, SplittingChange, _report_error,
                            apply_splitting_change, lie_algebroid_tensor_check)
from .linalg import (DimensionError, FreeModule, Section, SubBundle, TensorMap, annihilator,
                     complement_basis, rational_inverse, witness_for)
from .report import CheckEntry, CheckReport, Checker, Functions, zero_check
from .structures import (CourantData, LACourantSplit, MatchedPair2Reps, SelfDual2Rep, SplitLie2,
                         check_matched_m)

SYM2 = (("sym", 0, 1),)


class Coordinates:
    """A constant subbundle seen as a free module of its own rank.

    ``lift`` sends coordinates to sections of the ambient module, ``coords``
    goes back and raises when the section leaves the subbundle.
    """

    def __init__(self, sub: SubBundle, name: str):
        self.sub = sub
        self.module = FreeModule(name, sub.rank, sub.ambient.num_vars)

    def lift(self, s: Sequence[Poly]) -> Section:
        amb = self.sub.ambient
        out = list(amb.zero())
        for c, b in zip(s, self.sub.basis):
            if c:
                for a, v in enumerate(b):
                    if v:
                        out[a] = out[a] + c.scale(v)
        return Section(out)

    def coords(self, s: Sequence[Poly]) -> Section:
        c = self.sub.coordinates(s)
        if c is None:
            raise ValueError(f"section leaves the subbundle {self.sub}")
        return self.module.section(c)

    def inclusion(self) -> TensorMap:
        return TensorMap.from_function((self.module,), self.sub.ambient, self.lift)


class DoubleSubbundleData:
    """(D; B', U; M) with core K.  ``Lambda`` records <sigma(q1), sigma(q2)>
    for a non-Lagrangian splitting; absent means the splitting is Lagrangian."""

    def __init__(self, U: SubBundle, Bp: SubBundle, K: SubBundle, Lambda: TensorMap | None = None):
        Q = U.ambient
        if K.ambient.rank != Q.rank or K.ambient.num_vars != Q.num_vars:
            raise DimensionError("the core must live in the dual of U's ambient")
        if Bp.ambient.num_vars != Q.num_vars:
            raise DimensionError("sides over different bases")
        if Lambda is not None:
            if Lambda.arity != 2 or Lambda.inputs[0].rank != Q.rank or Lambda.output.rank != Bp.ambient.rank:
                raise DimensionError("Lambda must map Q x Q to B*")
            Lambda = Lambda.with_symmetry(SYM2)
        self.U, self.Bp, self.K, self.Lambda = U, Bp, K, Lambda

    @property
    def Q(self) -> FreeModule:
        return self.U.ambient

    @property
    def B(self) -> FreeModule:
        return self.Bp.ambient

    @classmethod
    def lagrangian(cls, U: SubBundle, Bp: SubBundle) -> "DoubleSubbundleData":
        """The maximal isotropic candidate with core U°."""
        return cls(U, Bp, annihilator(U))

    def __repr__(self) -> str:
        return f"DoubleSubbundleData(U rank {self.U.rank}, B' rank {self.Bp.rank}, K rank {self.K.rank})"


def check_isotropic(D: DoubleSubbundleData) -> CheckReport:
    U, K = D.U.sections(), D.K.sections()
    report = CheckReport()
    report.add(zero_check("K_in_U_annihilator",
                          (((i, j), k.dot(u)) for i, k in enumerate(K) for j, u in enumerate(U))))
    if D.Lambda is None:
        report.add(CheckEntry("Lambda_UU_in_Bp_annihilator", True))
    else:
        Bp = D.Bp.sections()
        report.add(zero_check("Lambda_UU_in_Bp_annihilator",
                              (((i, j, k), D.Lambda(u, v).dot(b))
                               for i, u in enumerate(U) for j, v in enumerate(U) for k, b in enumerate(Bp))))
    return report


def check_maximal_isotropic(D: DoubleSubbundleData) -> CheckReport:
    report = check_isotropic(D)
    n, p = D.Q.rank, D.Q.num_vars
    gap = D.U.rank + D.K.rank - n
    if gap:
        report.add(CheckEntry("U_is_K_annihilator", False, witness_for(Poly.const(gap, p), ())))
        return report
    Kann = annihilator(D.K)
    for i, s in enumerate(Kann.sections()):
        r = D.U.residual(s)
        for k, c in enumerate(r):
            if c:
                report.add(CheckEntry("U_is_K_annihilator", False, witness_for(c, (i, k))))
                return report
    report.add(CheckEntry("U_is_K_annihilator", True))
    return report


# -- Lagrangian correction --------------------------------------------------

class LagrangianCorrection:
    """A linear change of splitting psi in Gamma(Q* x Q* x B*), the horizontal
    lift moving by sigma'(q) = sigma(q) + psi(q, .).  Unlike SplittingChange
    it need not be alternating."""

    def __init__(self, psi: TensorMap):
        self.psi = psi

    def transformed_lambda(self, Lambda: TensorMap) -> TensorMap:
        """Lambda'(q1, q2) = Lambda(q1, q2) + psi(q1, q2) + psi(q2, q1)."""
        return Lambda + self.psi + self.psi.swap_slots(0, 1)

    def adapted_entry(self, D: DoubleSubbundleData) -> CheckEntry:
        """The corrected splitting stays adapted to D when psi(u, u') kills B'."""
        U, Bp = D.U.sections(), D.Bp.sections()
        return zero_check("correction_adapted",
                          (((i, j, k), self.psi(u, v).dot(b))
                           for i, u in enumerate(U) for j, v in enumerate(U) for k, b in enumerate(Bp)))


def lagrangianize(Lambda: TensorMap) -> LagrangianCorrection:
    """sigma'(q) = sigma(q) - 1/2 Lambda(q, .); the new Lambda vanishes."""
    Lambda = Lambda.with_symmetry(SYM2)
    corr = LagrangianCorrection(Lambda.scale(Fraction(-1, 2)))
    if corr.transformed_lambda(Lambda).coeffs:
        raise ArithmeticError("Lagrangian correction left a nonzero Lambda")
    return corr


# -- VB-Dirac, subalgebroid, LA-Dirac --------------------------------------

def _require_max_isotropic(D: DoubleSubbundleData) -> None:
    rep = check_maximal_isotropic(D)
    if not rep.ok:
        raise _report_error("D is not maximal isotropic", rep)
    if D.Lambda is not None and D.Lambda.coeffs:
        raise PreconditionError("the splitting must be Lagrangian; apply lagrangianize first")


def _split_parts(S) -> tuple[SplitLie2, SelfDual2Rep | None]:
    if isinstance(S, LACourantSplit):
        return S.lie2, S.rep
    if isinstance(S, SplitLie2):
        return S, None
    raise TypeError("expected an LACourantSplit or a SplitLie2")


def _vb_entries(L: SplitLie2, D: DoubleSubbundleData, checker: Checker) -> list[CheckEntry]:
    Uc, Bc = Coordinates(D.U, "U"), Coordinates(D.Bp, "B'")
    Uann = Coordinates(annihilator(D.U), "U°")
    U, Bp, Um, Bpm = D.U, D.Bp, Uc.module, Bc.module
    lu, lb, lt = Uc.lift, Bc.lift, Uann.lift
    return [
        checker.identity("dB_core_in_Bp", (Uann.module,), lambda t: Bp.residual(L.dB(lt(t)))),
        checker.identity("nabla_U_preserves_Bp", (Um, Bpm), lambda u, b: Bp.residual(L.nabla(lu(u), lb(b)))),
        checker.identity("bracket_U_closed", (Um, Um), lambda u, v: U.residual(L.dull(lu(u), lu(v)))),
        checker.identity("omega_U_into_core", (Um, Um, Um, Bpm),
                         lambda u, v, w, b: L.omega(lu(u), lu(v), lu(w)).dot(lb(b))),
    ]


def _sub_entries(P: SelfDual2Rep, D: DoubleSubbundleData, checker: Checker) -> list[CheckEntry]:
    Uc, Bc = Coordinates(D.U, "U"), Coordinates(D.Bp, "B'")
    Uann = Coordinates(annihilator(D.U), "U°")
    U, Bp, Um, Bpm = D.U, D.Bp, Uc.module, Bc.module
    lu, lb, lt = Uc.lift, Bc.lift, Uann.lift
    return [
        checker.identity("dQ_core_in_U", (Uann.module,), lambda t: U.residual(P.dQ(lt(t)))),
        checker.identity("nabla_Bp_preserves_U", (Bpm, Um), lambda b, u: U.residual(P.nablaQ(lb(b), lu(u)))),
        checker.identity("bracket_Bp_closed", (Bpm, Bpm), lambda a, b: Bp.residual(P.bracket(lb(a), lb(b)))),
        checker.identity("R_Bp_into_core", (Bpm, Bpm, Um, Um),
                         lambda a, b, u, v: P.R(lb(a), lb(b), lu(u)).dot(lu(v))),
    ]


def check_vb_dirac(S, D: DoubleSubbundleData, checker: Checker | None = None) -> CheckReport:
    """d_B(U°) in B', nabla_u preserves B', U closed under the dull bracket,
    and i_{u2} i_{u1} omega maps B' into U°."""
    checker = checker or Checker()
    _require_max_isotropic(D)
    L, _ = _split_parts(S)
    return CheckReport(_vb_entries(L, D, checker))


def check_subalgebroid(rep: SelfDual2Rep, D: DoubleSubbundleData, checker: Checker | None = None) -> CheckReport:
    """d_Q(U°) in U, nabla_b preserves U, B' closed under the bracket, and
    R(b1, b2) maps U into U°."""
    checker = checker or Checker()
    _require_max_isotropic(D)
    return CheckReport(_sub_entries(rep, D, checker))


LA_DIRAC_CONDITIONS = {
    1: ("dB_core_in_Bp", "dQ_core_in_U"),
    2: ("nabla_U_preserves_Bp",),
    3: ("nabla_Bp_preserves_U",),
    4: ("bracket_U_closed",),
    5: ("bracket_Bp_closed",),
    6: ("omega_U_into_core",),
    7: ("R_Bp_into_core",),
}


def check_la_dirac(S: LACourantSplit, D: DoubleSubbundleData, checker: Checker | None = None,
                   double: bool = True) -> CheckReport:
    """The seven LA-Dirac conditions.  When they hold and B' = B, the two
    restricted 2-representations are built and (m1)-(m7) appended under the
    prefix ``double:``."""
    checker = checker or Checker()
    _require_max_isotropic(D)
    report = CheckReport(_vb_entries(S.lie2, D, checker) + _sub_entries(S.rep, D, checker))
    if double and report.ok and D.Bp.rank == D.B.rank:
        report.extend(check_matched_m(restricted_matched_pair(S, D), checker), prefix="double:")
    return report


def la_dirac_condition(report: CheckReport, n: int) -> bool:
    return all(report.passed(a) for a in LA_DIRAC_CONDITIONS[n])


def restricted_matched_pair(S: LACourantSplit, D: DoubleSubbundleData) -> MatchedPair2Reps:
    """The two side 2-representations of an LA-Dirac D with B' = B: U acts on
    d_B: U° -> B by (nabla, Delta, omega|U), and B acts on d_Q: U° -> U by
    (nabla, nabla*, R) restricted."""
    L, P = S.lie2, S.rep
    Uc, Cc = Coordinates(D.U, "U"), Coordinates(annihilator(D.U), "U°")
    Um, C = Uc.module, Cc.module
    Bm = S.B
    lu, lc = Uc.lift, Cc.lift
    rhoQ = L.Q.rho
    A = AnchoredBundle(Um, [rhoQ(lu(u)) for u in Um.frames()])
    brA = DullBracket(A, {(i, j): Uc.coords(L.dull(lu(a), lu(b)))
                          for i, a in enumerate(Um.frames()) for j, b in enumerate(Um.frames()) if i != j})
    Bb = P.B
    dA = TensorMap.from_function((C,), Um, lambda t: Uc.coords(P.dQ(lc(t))))
    dB = TensorMap.from_function((C,), Bm, lambda t: L.dB(lc(t)))
    A_on_B = Connection.tabulate(A, Bm, lambda u, b: L.nabla(lu(u), b))
    A_on_C = Connection.tabulate(A, C, lambda u, t: Cc.coords(L.delta(lu(u), lc(t))))
    Qm = S.Q

    def RA(a1, a2, b):
        return Cc.coords(Qm.dual().section(L.omega(lu(a1), lu(a2), q).dot(b) for q in Qm.frames()))

    RAt = TensorMap.from_function((Um, Um, Bm), C, RA, ALT2)
    B_on_A = Connection.tabulate(Bb, Um, lambda b, u: Uc.coords(P.nablaQ(b, lu(u))))
    B_on_C = Connection.tabulate(Bb, C, lambda b, t: Cc.coords(P.nablaQstar(b, lc(t))))
    RBt = TensorMap.from_function((Bm, Bm, Um), C, lambda b1, b2, u: Cc.coords(P.R(b1, b2, lu(u))), ALT2)
    return MatchedPair2Reps(A, brA, Bb, P.bracket, C, dA, dB, A_on_B, A_on_C, RAt, B_on_A, B_on_C, RBt)


# -- induced Lie algebroid ------------------------------------------------------

class InducedAlgebroid:
    def __init__(self, coords: Coordinates, anchored: AnchoredBundle, bracket: DullBracket, report: CheckReport):
        self.coords = coords
        self.anchored = anchored
        self.bracket = bracket
        self.report = report

    @property
    def module(self) -> FreeModule:
        return self.coords.module


def adapted_splitting_change(D: DoubleSubbundleData, checker: Checker) -> SplittingChange:
    """A random phi with phi(u, u') = 0 for u, u' in U."""
    Q, B = D.Q, D.B
    p, n = Q.num_vars, Q.rank
    basis = [list(b) for b in D.U.basis] + [list(c) for c in complement_basis(D.U)]
    r = D.U.rank
    inv = rational_inverse(basis)   # e_a = sum_i inv[a][i] f_i
    adapted = {}
    for i in range(n):
        for j in range(i + 1, n):
            if j >= r and B.rank:
                k = checker.rng.randrange(B.rank)
                adapted[(i, j, k)] = checker.random_poly(p, degree=1, terms=2)
    coeffs: dict = {}
    for a in range(n):
        for b in range(n):
            for (i, j, k), c in adapted.items():
                w = inv[a][i] * inv[b][j] - inv[a][j] * inv[b][i]
                if w:
                    coeffs[(a, b, k)] = coeffs.get((a, b, k), Poly.zero(p)) + c.scale(w)
    return SplittingChange(TensorMap((Q, Q), B.dual(), coeffs, ALT2))


def induced_lie_algebroid(S, D: DoubleSubbundleData, checker: Checker | None = None,
                          changes: int = 3) -> InducedAlgebroid:
    """Restriction of the dull bracket and of rho_Q to U.  The report holds
    the Lie algebroid checks and splitting independence under random adapted
    changes of Lagrangian splitting."""
    checker = checker or Checker()
    if D.Bp.rank != D.B.rank:
        raise PreconditionError("the induced Lie algebroid needs B' = B")
    vb = check_vb_dirac(S, D, checker)
    if not vb.ok:
        raise _report_error("D is not VB-Dirac", vb)
    L, _ = _split_parts(S)
    Uc = Coordinates(D.U, "U")
    Um, lu = Uc.module, Uc.lift
    A = AnchoredBundle(Um, [L.Q.rho(lu(u)) for u in Um.frames()])
    br = DullBracket(A, {(i, j): Uc.coords(L.dull(lu(a), lu(b)))
                         for i, a in enumerate(Um.frames()) for j, b in enumerate(Um.frames()) if i != j})
    report = lie_algebroid_tensor_check(A, br, checker)
    report.add(checker.identity("bracket_restriction", (Um, Um),
                                lambda a, b: lu(br(a, b)) - L.dull(lu(a), lu(b))))
    if isinstance(S, LACourantSplit):
        for k in range(changes):
            phi = adapted_splitting_change(D, checker)
            new = apply_splitting_change(S, phi, checker)
            report.add(checker.identity(f"splitting_independent[{k}]", (Um, Um),
                                        lambda a, b: new.dull(lu(a), lu(b)) - L.dull(lu(a), lu(b))))
    return InducedAlgebroid(Uc, A, br, report)


# -- pseudo-Dirac structures ------------------------------------------------

class PseudoDiracData:
    """(U, nabla^p) with nabla^p u = [nabla] u, stored through the pairings
    ``table[k][a][l] = <nabla_{d/dx_a} u_k, u_l>`` which only see the class
    of nabla u modulo U-perp."""

    def __init__(self, E: CourantData, U: SubBundle, conn: Connection):
        self.E = E
        self.U = U
        self.coords = Coordinates(U, "U")
        self.conn = conn
        p = E.module.num_vars
        T = conn.acting.module
        us = U.sections()
        self.table = [[[E.pair(conn(T.frame(a), u), v) for v in us] for a in range(p)] for u in us]
        self.quadratic_report: CheckReport | None = None

    @property
    def num_vars(self) -> int:
        return self.E.module.num_vars

    def nabla_p(self, s: Sequence[Poly]) -> list[Section]:
        """nabla^p of the U-section with coordinates s: one U*-section per
        coordinate direction, by the Leibniz rule from the frame table."""
        p, r = self.num_vars, self.U.rank
        Um = self.coords.module
        us = self.U.sections()
        out = []
        for a in range(p):
            vals = [Poly.zero(p) for _ in range(r)]
            for k, c in enumerate(s):
                if not c:
                    continue
                dc = c.diff(a)
                for l in range(r):
                    t = self.table[k][a][l]
                    v = c * t if t else Poly.zero(p)
                    if dc:
                        v = v + dc * self.E.pair(us[k], us[l])
                    vals[l] = vals[l] + v
            out.append(Um.dual().section(vals))
        return out

    def pair_p(self, s: Sequence[Poly], x: Sequence[Poly]) -> list[Poly]:
        """The one-form <nabla^p s, x> for x a section of U (coordinates)."""
        return [w.dot(x) for w in self.nabla_p(s)]

    def bracket_p(self, s1, s2) -> Section:
        """[[u1, u2]]_E - rho^* <nabla^p u1, u2>, as a section of E."""
        lift = self.coords.lift
        theta = self.pair_p(s1, s2)
        return self.E.bracket(lift(s1), lift(s2)) - self.E.Dmap(Section(theta))


def _one_form_d(theta: Sequence[Poly], p: int) -> list[list[Poly]]:
    return [[theta[b].diff(a) - theta[a].diff(b) for b in range(p)] for a in range(p)]


def _contract(X: Derivation, two_form: list[list[Poly]], p: int) -> list[Poly]:
    return [sum((X.components[a] * two_form[a][b] for a in range(p) if X.components[a]), Poly.zero(p))
            for b in range(p)]


def pseudo_curvature(pd: PseudoDiracData, s1, s2, s3) -> list[Poly]:
    """Psi(u1, u2, u3), a one-form; needs the p-bracket to stay in U."""
    p = pd.num_vars
    E, lift, coords = pd.E, pd.coords.lift, pd.coords.coords
    rho = E.E.rho
    out = [Poly.zero(p) for _ in range(p)]
    for a, b, c in ((s1, s2, s3), (s2, s3, s1), (s3, s1, s2)):
        brc = coords(pd.bracket_p(a, b))
        first = pd.pair_p(c, brc)
        second = _contract(rho(lift(a)), _one_form_d(pd.pair_p(b, c), p), p)
        out = [o + x + y for o, x, y in zip(out, first, second)]
    r1, r2 = rho(lift(s1)), rho(lift(s2))
    n1, n2 = pd.pair_p(s2, s3), pd.pair_p(s1, s3)
    f = sum((r1.components[k] * n1[k] - r2.components[k] * n2[k] for k in range(p)), Poly.zero(p))
    f = f - E.pair(pd.bracket_p(s1, s2), lift(s3))
    return [o + f.diff(k) for k, o in enumerate(out)]


def pseudo_dirac(E: CourantData, conn: Connection, U: SubBundle,
                 checker: Checker | None = None) -> tuple[PseudoDiracData, CheckReport]:
    """The pseudo-Dirac pair (U, [nabla]) of a metric TM-connection on E that
    preserves U.  The report has the four defining conditions and, when the
    first three hold, the identity Jac_p = D(Psi).  Quadratic pseudo-Dirac
    conditions go to ``data.quadratic_report``."""
    from .constructions import _require_metric
    checker = checker or Checker()
    if not E.pairing.nondegenerate:
        raise PreconditionError("pseudo-Dirac structures need a nondegenerate pairing")
    _require_metric(conn, E.pairing)
    p = E.module.num_vars
    T = conn.acting.module
    for a in range(p):
        for u in U.sections():
            if not U.contains(conn(T.frame(a), u)):
                raise PreconditionError(f"the connection does not preserve U (direction {a})")
    pd = PseudoDiracData(E, U, conn)
    Um, lift = pd.coords.module, pd.coords.lift
    fn = Functions(p)
    report = CheckReport()

    def direct(s, v):
        return [E.pair(conn(T.frame(a), lift(s)), lift(v)) for a in range(p)]

    report.add(checker.identity(
        "pseudo_leibniz", (fn, Um, Um),
        lambda f, s, v: [x - f * y - f.diff(a) * E.pair(lift(s), lift(v))
                         for a, (x, y) in enumerate(zip(pd.pair_p(s * f, v), pd.pair_p(s, v)))]
        + [x - y for x, y in zip(pd.pair_p(s, v), direct(s, v))]))
    report.add(checker.identity(
        "pseudo_metric", (Um, Um),
        lambda s, v: [E.pair(lift(s), lift(v)).diff(a) - x - y
                      for a, (x, y) in enumerate(zip(pd.pair_p(s, v), pd.pair_p(v, s)))]))
    report.add(checker.identity("pseudo_bracket_in_U", (Um, Um), lambda s, v: U.residual(pd.bracket_p(s, v))))
    if report.passed("pseudo_bracket_in_U"):
        report.add(checker.identity("pseudo_curvature", (Um, Um, Um),
                                    lambda a, b, c: pseudo_curvature(pd, a, b, c)))
        if all(report.passed(a) for a in ("pseudo_leibniz", "pseudo_metric")):
            coords = pd.coords.coords

            def br(a, b):
                return coords(pd.bracket_p(a, b))

            def jac(a, b, c):
                j = br(br(a, b), c) + br(br(b, c), a) + br(br(c, a), b)
                return lift(j) - E.Dmap(Section(pseudo_curvature(pd, a, b, c)))

            report.add(checker.identity("jacobiator_relation", (Um, Um, Um), jac))
    else:
        w = report["pseudo_bracket_in_U"].witness
        report.add(CheckEntry("pseudo_curvature", False, w))
    pd.quadratic_report = _quadratic_entries(pd, checker)
    return pd, report


def _quadratic_entries(pd: PseudoDiracData, checker: Checker) -> CheckReport:
    E, U, conn = pd.E, pd.U, pd.conn
    g = E.pairing
    perp = SubBundle(E.module, [[c for c in _const_vector(g.raise_(t))] for t in annihilator(U).sections()])
    Pc = Coordinates(perp, "U^perp")
    Um, lift = pd.coords.module, pd.coords.lift
    T = conn.acting
    rep = CheckReport()
    rep.add(checker.identity("U_perp_in_U", (Pc.module,), lambda w: U.residual(Pc.lift(w))))
    rep.add(checker.identity("nabla_p_kills_U_perp", (T.module, Pc.module, Um),
                             lambda X, w, v: E.pair(conn(X, Pc.lift(w)), lift(v))))
    R = curvature(conn, DullBracket.zero(T))
    rep.add(checker.identity("induced_flat", (T.module, T.module, Um, Um),
                             lambda X, Y, s, v: E.pair(R(X, Y, lift(s)), lift(v))))
    return rep


def _const_vector(s: Section) -> list[Fraction]:
    return [c.constant_term() for c in s]
