"""Anchored bundles, dull brackets, linear and Dorfman connections,
curvatures, Jacobiators and Koszul differentials.

Brackets and connections are stored as tables on the global frame and are
extended to arbitrary sections by their fixed Leibniz rules, so two
operators are equal exactly when their tables agree.
"""
from __future__ import annotations

from itertools import combinations, permutations
from typing import Callable, Mapping, Sequence

from .basering import DimensionError, Derivation, Poly, differential
from .linalg import FreeModule, Section, TensorMap, trivial_line
from .report import CheckReport, Checker, Functions


class AnchoredBundle:
    """A free module with an anchor e_i -> rho(e_i), extended linearly."""

    def __init__(self, module: FreeModule, anchor: Sequence[Derivation]):
        anchor = tuple(anchor)
        if len(anchor) != module.rank:
            raise DimensionError(f"{module.name} has rank {module.rank}, got {len(anchor)} anchor images")
        for X in anchor:
            if X.num_vars != module.num_vars:
                raise DimensionError("anchor image over the wrong base")
        self.module = module
        self.anchor = anchor

    @property
    def rank(self) -> int:
        return self.module.rank

    @property
    def num_vars(self) -> int:
        return self.module.num_vars

    @classmethod
    def tangent(cls, num_vars: int, name: str = "TM") -> "AnchoredBundle":
        return cls(FreeModule(name, num_vars, num_vars),
                   [Derivation.partial(i, num_vars) for i in range(num_vars)])

    @classmethod
    def zero_anchor(cls, module: FreeModule) -> "AnchoredBundle":
        return cls(module, [Derivation.zero(module.num_vars)] * module.rank)

    def rho(self, s: Sequence[Poly]) -> Derivation:
        p = self.num_vars
        comps = [Poly.zero(p) for _ in range(p)]
        for c, X in zip(s, self.anchor):
            if c:
                comps = [a + c * b if b else a for a, b in zip(comps, X.components)]
        return Derivation(comps)

    def apply(self, s: Sequence[Poly], f: Poly) -> Poly:
        """rho(s)(f)."""
        return self.rho(s)(f)

    def rho_star(self, xi: Sequence[Poly]) -> Section:
        """Transpose of the anchor, T*M -> dual module."""
        p = self.num_vars
        out = []
        for X in self.anchor:
            acc = Poly.zero(p)
            for a, b in zip(X.components, xi):
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return Section(out)

    def rho_star_d(self, f: Poly) -> Section:
        return self.rho_star(differential(f))

    def __repr__(self) -> str:
        return f"AnchoredBundle({self.module.name}, rank {self.rank})"


def _table(rank_a: int, rank_b: int, out: FreeModule, table: Mapping) -> dict:
    clean = {}
    for (i, j), s in table.items():
        if not (0 <= i < rank_a and 0 <= j < rank_b):
            raise DimensionError(f"table index {(i, j)} out of range")
        s = out.section(s)
        if not s.is_zero():
            clean[(i, j)] = s
    return clean


class DullBracket:
    """Antisymmetric bracket on an anchored bundle satisfying the Leibniz
    rule [[q1, f q2]] = f [[q1, q2]] + rho(q1)(f) q2.

    ``table`` gives [[e_i, e_j]]; entries for (j, i) may be omitted and are
    then filled by antisymmetry, otherwise antisymmetry is validated.
    """

    def __init__(self, base: AnchoredBundle, table: Mapping[tuple[int, int], Sequence[Poly]]):
        n = base.rank
        M = base.module
        given = _table(n, n, M, table)
        full: dict = {}
        for (i, j), s in given.items():
            if i == j:
                raise ValueError(f"bracket of e_{i} with itself must vanish")
            if (j, i) in given and not (given[(j, i)] + s).is_zero():
                raise ValueError(f"bracket table not antisymmetric at {(i, j)}")
            full[(i, j)] = s
            full[(j, i)] = -s
        self.base = base
        self.table = full

    @property
    def module(self) -> FreeModule:
        return self.base.module

    @classmethod
    def zero(cls, base: AnchoredBundle) -> "DullBracket":
        return cls(base, {})

    @classmethod
    def tabulate(cls, base: AnchoredBundle, fn: Callable[[Section, Section], Sequence[Poly]]) -> "DullBracket":
        M = base.module
        return cls(base, {(i, j): fn(M.frame(i), M.frame(j))
                          for i in range(M.rank) for j in range(i + 1, M.rank)})

    def structure(self, i: int, j: int) -> Section:
        return self.table.get((i, j)) or self.module.zero()

    def __call__(self, q1: Sequence[Poly], q2: Sequence[Poly]) -> Section:
        M = self.module
        X1 = self.base.rho(q1)
        X2 = self.base.rho(q2)
        out = [X1(b) - X2(a) for a, b in zip(q1, q2)]
        for (i, j), c in self.table.items():
            a, b = q1[i], q2[j]
            if a and b:
                f = a * b
                out = [o + f * x if x else o for o, x in zip(out, c)]
        return Section(out) if out else M.zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, DullBracket):
            return NotImplemented
        return (self.table == other.table and self.base.anchor == other.base.anchor)

    __hash__ = None

    def __repr__(self) -> str:
        return f"DullBracket({self.module.name}, {len(self.table) // 2} nonzero pairs)"


class Connection:
    """A connection of the anchored bundle ``acting`` on the module ``on``:
    linear over functions in the acting slot and Leibniz in the other,
    nabla_a (f s) = f nabla_a s + rho(a)(f) s.

    ``table[(i, j)]`` is nabla_{e_i} f_j.
    """

    def __init__(self, acting: AnchoredBundle, on: FreeModule, table: Mapping[tuple[int, int], Sequence[Poly]]):
        if acting.num_vars != on.num_vars:
            raise DimensionError("connection between modules over different bases")
        self.acting = acting
        self.on = on
        self.table = _table(acting.rank, on.rank, on, table)

    @classmethod
    def zero(cls, acting: AnchoredBundle, on: FreeModule) -> "Connection":
        return cls(acting, on, {})

    @classmethod
    def tabulate(cls, acting: AnchoredBundle, on: FreeModule,
                 fn: Callable[[Section, Section], Sequence[Poly]]) -> "Connection":
        return cls(acting, on, {(i, j): fn(acting.module.frame(i), on.frame(j))
                                for i in range(acting.rank) for j in range(on.rank)})

    def christoffel(self, i: int, j: int) -> Section:
        return self.table.get((i, j)) or self.on.zero()

    def __call__(self, a: Sequence[Poly], s: Sequence[Poly]) -> Section:
        X = self.acting.rho(a)
        out = [X(c) for c in s]
        for (i, j), g in self.table.items():
            x, y = a[i], s[j]
            if x and y:
                f = x * y
                out = [o + f * v if v else o for o, v in zip(out, g)]
        return Section(out) if out else self.on.zero()

    def dual(self) -> "Connection":
        """The dual connection: <nabla*_a t, s> = rho(a)<t, s> - <t, nabla_a s>."""
        table = {}
        n = self.on.rank
        for i in range(self.acting.rank):
            for k in range(n):
                table[(i, k)] = [-self.christoffel(i, j)[k] for j in range(n)]
        return Connection(self.acting, self.on.dual(), table)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Connection):
            return NotImplemented
        return self.table == other.table and self.acting.anchor == other.acting.anchor

    __hash__ = None

    def __repr__(self) -> str:
        return f"Connection({self.acting.module.name} on {self.on.name})"


class DorfmanConnection:
    """A Dorfman connection of an anchored bundle Q on its dual:
    Delta_q (f t) = f Delta_q t + rho(q)(f) t  and
    Delta_{f q} t = f Delta_q t + <q, t> rho^* df.

    ``table[(i, j)]`` is Delta_{e_i} eps_j.
    """

    def __init__(self, base: AnchoredBundle, table: Mapping[tuple[int, int], Sequence[Poly]]):
        self.base = base
        self.on = base.module.dual()
        self.table = _table(base.rank, base.rank, self.on, table)

    @property
    def acting(self) -> AnchoredBundle:
        return self.base

    @classmethod
    def tabulate(cls, base: AnchoredBundle, fn: Callable[[Section, Section], Sequence[Poly]]) -> "DorfmanConnection":
        M, D = base.module, base.module.dual()
        return cls(base, {(i, j): fn(M.frame(i), D.frame(j))
                          for i in range(M.rank) for j in range(M.rank)})

    def christoffel(self, i: int, j: int) -> Section:
        return self.table.get((i, j)) or self.on.zero()

    def __call__(self, q: Sequence[Poly], t: Sequence[Poly]) -> Section:
        X = self.base.rho(q)
        out = [X(c) for c in t]
        for c_t, c_q in zip(t, q):
            if c_t and c_q:
                d = self.base.rho_star_d(c_q)
                out = [o + c_t * v if v else o for o, v in zip(out, d)]
        for (i, j), g in self.table.items():
            x, y = q[i], t[j]
            if x and y:
                f = x * y
                out = [o + f * v if v else o for o, v in zip(out, g)]
        return Section(out) if out else self.on.zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, DorfmanConnection):
            return NotImplemented
        return self.table == other.table and self.base.anchor == other.base.anchor

    __hash__ = None

    def __repr__(self) -> str:
        return f"DorfmanConnection({self.base.module.name} on {self.on.name})"


def dull_to_dorfman(br: DullBracket) -> DorfmanConnection:
    """Dual Dorfman connection:  rho(q)<q', t> = <[[q, q']], t> + <q', Delta_q t>.

    On frames this reads (Delta_{e_i} eps_k)_j = -[[e_i, e_j]]_k.
    """
    n = br.module.rank
    table = {}
    for i in range(n):
        for k in range(n):
            table[(i, k)] = [-br.structure(i, j)[k] for j in range(n)]
    return DorfmanConnection(br.base, table)


def dorfman_to_dull(delta: DorfmanConnection) -> DullBracket:
    """Inverse of ``dull_to_dorfman``; fails if the result is not antisymmetric."""
    n = delta.base.rank
    table = {}
    for i in range(n):
        for j in range(n):
            if i != j:
                table[(i, j)] = [-delta.christoffel(i, k)[j] for k in range(n)]
    return DullBracket(delta.base, table)


def jacobiator(br: DullBracket, q1, q2, q3) -> Section:
    """[[[[q1, q2]], q3]] + cyclic permutations."""
    return br(br(q1, q2), q3) + br(br(q2, q3), q1) + br(br(q3, q1), q2)


def curvature(conn, br: DullBracket) -> Callable[..., Section]:
    """R(a, b) s = nabla_a nabla_b s - nabla_b nabla_a s - nabla_{[[a, b]]} s.

    ``conn`` is a Connection or a DorfmanConnection; ``br`` is the bracket on
    the acting bundle.
    """
    def R(a, b, s):
        return conn(a, conn(b, s)) - conn(b, conn(a, s)) - conn(br(a, b), s)
    return R


class NotTensorialError(ValueError):
    pass


def curvature_tensor(conn, br: DullBracket, checker: Checker | None = None) -> TensorMap:
    """The curvature tabulated on frames, with a tensoriality test against
    random polynomial multiples of the arguments."""
    R = curvature(conn, br)
    A = conn.acting.module
    T = TensorMap.from_function((A, A, conn.on), conn.on, R, symmetry=(("alt", 0, 1),))
    checker = checker or Checker()
    w = checker.find_failure((A, A, conn.on), lambda a, b, s: R(a, b, s) - T(a, b, s))
    if w is not None:
        raise NotTensorialError(f"curvature is not tensorial: {w.poly} at frames {w.frames}")
    return T


# -- forms and Koszul differentials ---------------------------------------

def koszul_eval(br: DullBracket, form: Callable[..., Sequence[Poly]], args: Sequence,
                conn=None) -> Section:
    """Value of the Koszul differential of an alternating map on ``args``.

    (d w)(q_0..q_k) = sum_i (-1)^i nabla_{q_i} w(.. q_i omitted ..)
                    + sum_{i<j} (-1)^{i+j} w([[q_i, q_j]], .. q_i, q_j omitted ..)

    Without ``conn`` the form is scalar valued (a 1-tuple) and nabla_q = rho(q).
    """
    args = list(args)
    total = None

    def acc(x):
        nonlocal total
        total = x if total is None else total + x

    for i, q in enumerate(args):
        rest = args[:i] + args[i + 1:]
        val = Section(form(*rest))
        if conn is None:
            X = br.base.rho(q)
            term = Section(X(c) for c in val)
        else:
            term = conn(q, val)
        acc(term if i % 2 == 0 else -term)
    for i, j in combinations(range(len(args)), 2):
        rest = [a for k, a in enumerate(args) if k not in (i, j)]
        term = Section(form(br(args[i], args[j]), *rest))
        acc(term if (i + j) % 2 == 0 else -term)
    return total


def koszul_d(br: DullBracket, form: TensorMap, conn=None) -> TensorMap:
    """d_Q (scalar forms, output the trivial line) or d_nabla (forms with
    values in ``conn.on``) of an alternating tensor map on Q."""
    Q = br.module
    for m in form.inputs:
        if m.rank != Q.rank:
            raise DimensionError("form slots must be the bracket's bundle")
    if conn is None and form.output.rank != 1:
        raise DimensionError("scalar forms take values in the trivial line; pass a connection otherwise")
    if conn is not None and conn.on.rank != form.output.rank:
        raise DimensionError("connection acts on a different module than the form's values")
    k = form.arity + 1
    sym = tuple(("alt", a, b) for a, b in combinations(range(k), 2))
    return TensorMap.from_function((Q,) * k, form.output,
                                   lambda *qs: koszul_eval(br, form, qs, conn), symmetry=sym)


def scalar_form(Q: FreeModule, k: int, values: Mapping[tuple, Poly | int]) -> TensorMap:
    """Alternating k-form on Q from its values on increasing index tuples."""
    R = trivial_line(Q.num_vars)
    coeffs = {}
    for idx, v in values.items():
        idx = tuple(idx)
        for perm in permutations(range(k)):
            key = tuple(idx[p] for p in perm)
            coeffs[key + (0,)] = v if _perm_sign(perm) > 0 else -_as_poly(v, Q.num_vars)
    sym = tuple(("alt", a, b) for a, b in combinations(range(k), 2))
    return TensorMap((Q,) * k, R, coeffs, sym)


def _as_poly(v, num_vars):
    return v if isinstance(v, Poly) else Poly.const(v, num_vars)


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def wedge(a: TensorMap, b: TensorMap) -> TensorMap:
    """Wedge product of scalar forms, shuffle convention (no factorials)."""
    if a.output.rank != 1 or b.output.rank != 1:
        raise DimensionError("wedge of scalar forms only")
    p, q = a.arity, b.arity
    Q = (a.inputs + b.inputs)[0] if (p + q) else None
    if Q is None:
        return TensorMap((), a.output, {(0,): a.coeff((0,)) * b.coeff((0,))})

    def fn(*vs):
        total = Poly.zero(Q.num_vars)
        for first in combinations(range(p + q), p):
            second = tuple(i for i in range(p + q) if i not in first)
            sign = _perm_sign(first + second)
            x = a(*(vs[i] for i in first))[0]
            if not x:
                continue
            y = b(*(vs[i] for i in second))[0]
            total = total + (x * y if sign > 0 else -(x * y))
        return (total,)

    sym = tuple(("alt", i, j) for i, j in combinations(range(p + q), 2))
    return TensorMap.from_function((Q,) * (p + q), a.output, fn, symmetry=sym)


def check_dull_axioms(br: DullBracket, checker: Checker | None = None) -> CheckReport:
    """Antisymmetry, the Leibniz rule and compatibility with the anchor."""
    checker = checker or Checker()
    Q = br.module
    rho = br.base.rho
    report = CheckReport()
    report.add(checker.identity("antisymmetry", (Q, Q), lambda a, b: br(a, b) + br(b, a)))
    report.add(checker.identity(
        "leibniz", (Q, Q, Functions(Q.num_vars)),
        lambda a, b, f: br(a, b * f) - br(a, b) * f - b * rho(a)(f)))
    report.add(checker.identity(
        "anchor", (Q, Q), lambda a, b: rho(br(a, b)) - rho(a).bracket(rho(b))))
    return report


def check_dorfman_identities(br: DullBracket, checker: Checker | None = None) -> CheckReport:
    """Jac(q1, q2, q3) = R_Delta(q1, q2)^* q3 for the dual Dorfman connection,
    and Delta_q(rho^* df) = rho^* d(rho(q) f).  The first holds for every dull
    bracket; the second exactly when the anchor is a bracket morphism."""
    checker = checker or Checker()
    Q = br.module
    delta = dull_to_dorfman(br)
    R = curvature(delta, br)
    A = br.base
    report = CheckReport()
    report.add(checker.identity(
        "jacobiator_dorfman", (Q, Q, Q, Q.dual()),
        lambda a, b, c, t: jacobiator(br, a, b, c).dot(t) - R(a, b, t).dot(c)))
    report.add(checker.identity(
        "dorfman_on_exact", (Q, Functions(Q.num_vars)),
        lambda q, f: delta(q, A.rho_star_d(f)) - A.rho_star_d(A.apply(q, f))))
    return report
