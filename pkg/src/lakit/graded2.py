"""The function algebra of the split [2]-manifold Q[-1] + B*[-2], truncated
at a fixed total degree, with graded derivations, degree -2 Poisson
brackets, homological vector fields and morphism pullbacks.

Generators: base coordinates (degree 0), the frame eps^i of Q* (degree 1)
and the frame b_j of B (degree 2).  A k-form on Q corresponds to
sum over i_1 < .. < i_k of w(e_{i_1}, .., e_{i_k}) eps^{i_1} .. eps^{i_k}.
"""
from __future__ import annotations

from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from .basering import DimensionError, Poly
from .linalg import FreeModule, Section, same_module
from .report import CheckEntry, CheckReport, Checker
from .structures import SelfDual2Rep, SplitLie2

DEFAULT_TRUNCATION = 6


class TruncationError(ArithmeticError):
    """A product or derivation image would exceed the truncation degree."""


def _merge_odd(a: tuple, b: tuple) -> tuple[int, tuple] | None:
    """Sign and sorted index tuple of eps^a eps^b, or None if it vanishes."""
    if set(a) & set(b):
        return None
    seq = list(a) + list(b)
    # count inversions between the two sorted blocks
    inv = 0
    for x in a:
        for y in b:
            if x > y:
                inv += 1
    return (-1 if inv % 2 else 1), tuple(sorted(seq))


class GradedAlgebra:
    """Context for graded functions: the modules Q and B, the base dimension
    and the truncation degree."""

    def __init__(self, Q: FreeModule, B: FreeModule, truncation: int = DEFAULT_TRUNCATION):
        if Q.num_vars != B.num_vars:
            raise DimensionError("Q and B over different bases")
        self.Q = Q
        self.B = B
        self.num_vars = Q.num_vars
        self.truncation = truncation

    def compatible(self, other: "GradedAlgebra") -> bool:
        return same_module(self.Q, other.Q) and same_module(self.B, other.B)

    # embeddings
    def zero(self) -> "GradedFunction":
        return GradedFunction(self, {})

    def function(self, f: Poly | int) -> "GradedFunction":
        if not isinstance(f, Poly):
            f = Poly.const(f, self.num_vars)
        return GradedFunction(self, {((), ()): f})

    def coordinate(self, a: int) -> "GradedFunction":
        return self.function(Poly.var(a, self.num_vars))

    def odd(self, i: int) -> "GradedFunction":
        """The degree-1 generator eps^i."""
        return GradedFunction(self, {((i,), ()): Poly.one(self.num_vars)})

    def even(self, j: int) -> "GradedFunction":
        """The degree-2 generator b_j."""
        return GradedFunction(self, {((), (j,)): Poly.one(self.num_vars)})

    def one_form(self, t: Sequence[Poly]) -> "GradedFunction":
        return GradedFunction(self, {((i,), ()): c for i, c in enumerate(t)})

    def b_section(self, b: Sequence[Poly]) -> "GradedFunction":
        return GradedFunction(self, {((), (j,)): c for j, c in enumerate(b)})

    def form(self, k: int, values: Callable[..., Poly]) -> "GradedFunction":
        """Scalar k-form given by its values on frame vectors."""
        Q = self.Q
        terms = {}
        for idx in combinations(range(Q.rank), k):
            terms[(idx, ())] = values(*(Q.frame(i) for i in idx))
        return GradedFunction(self, terms)

    def b_valued_one_form(self, values: Callable[[Section], Sequence[Poly]]) -> "GradedFunction":
        """Element of Omega^1(Q, B): q -> values(q)."""
        terms = {}
        for i in range(self.Q.rank):
            for j, c in enumerate(values(self.Q.frame(i))):
                terms[((i,), (j,))] = c
        return GradedFunction(self, terms)

    def generators(self) -> list[tuple[str, int, "GradedFunction"]]:
        gens = [("x", a, self.coordinate(a)) for a in range(self.num_vars)]
        gens += [("eps", i, self.odd(i)) for i in range(self.Q.rank)]
        gens += [("b", j, self.even(j)) for j in range(self.B.rank)]
        return gens


class GradedFunction:
    """A truncated element of the graded function algebra.

    ``terms`` maps (odd index tuple, even index multiset) to a polynomial
    coefficient; odd tuples are strictly increasing, even tuples sorted.
    """

    __slots__ = ("alg", "terms")

    def __init__(self, alg: GradedAlgebra, terms: Mapping[tuple, Poly]):
        self.alg = alg
        clean = {}
        for (odd, even), c in terms.items():
            if not isinstance(c, Poly):
                c = Poly.const(c, alg.num_vars)
            if c:
                odd, even = tuple(odd), tuple(sorted(even))
                if len(set(odd)) != len(odd):
                    continue
                if list(odd) != sorted(odd):
                    raise ValueError("odd indices must be increasing; use products to reorder")
                if len(odd) + 2 * len(even) > alg.truncation:
                    raise TruncationError(f"degree {len(odd) + 2 * len(even)} exceeds truncation {alg.truncation}")
                key = (odd, even)
                clean[key] = clean[key] + c if key in clean else c
        self.terms = {k: v for k, v in clean.items() if v}

    def _check(self, other: "GradedFunction") -> None:
        if not self.alg.compatible(other.alg):
            raise DimensionError("graded functions on different [2]-manifolds")

    def degrees(self) -> set[int]:
        return {len(o) + 2 * len(e) for o, e in self.terms}

    @property
    def degree(self) -> int:
        """Degree of a homogeneous element (0 for zero)."""
        ds = self.degrees()
        if not ds:
            return 0
        if len(ds) > 1:
            raise ValueError("inhomogeneous graded function")
        return ds.pop()

    def component(self, n: int) -> "GradedFunction":
        return GradedFunction(self.alg, {k: v for k, v in self.terms.items() if len(k[0]) + 2 * len(k[1]) == n})

    def is_zero(self) -> bool:
        return not self.terms

    def flat(self) -> list[Poly]:
        return [self.terms[k] for k in sorted(self.terms)]

    def __add__(self, other: "GradedFunction") -> "GradedFunction":
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return GradedFunction(self.alg, out)

    def __neg__(self) -> "GradedFunction":
        return GradedFunction(self.alg, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "GradedFunction") -> "GradedFunction":
        return self + (-other)

    def scale(self, f) -> "GradedFunction":
        return GradedFunction(self.alg, {k: f * v for k, v in self.terms.items()})

    def __mul__(self, other) -> "GradedFunction":
        if isinstance(other, GradedFunction):
            return graded_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other) -> "GradedFunction":
        return self.scale(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedFunction):
            return NotImplemented
        return self.alg.compatible(other.alg) and self.terms == other.terms

    __hash__ = None

    def __repr__(self) -> str:
        if not self.terms:
            return "GradedFunction(0)"
        parts = []
        for (odd, even), c in sorted(self.terms.items()):
            mono = "".join(f"e{i + 1}" for i in odd) + "".join(f"b{j + 1}" for j in even)
            parts.append(f"({c}){mono}")
        return "GradedFunction(" + " + ".join(parts) + ")"


def graded_mul(a: GradedFunction, b: GradedFunction) -> GradedFunction:
    """Graded commutative product; raises TruncationError beyond the truncation degree."""
    a._check(b)
    out: dict = {}
    D = a.alg.truncation
    for (o1, e1), c1 in a.terms.items():
        for (o2, e2), c2 in b.terms.items():
            deg = len(o1) + len(o2) + 2 * (len(e1) + len(e2))
            if deg > D:
                raise TruncationError(f"product of degree {deg} exceeds truncation {D}")
            merged = _merge_odd(o1, o2)
            if merged is None:
                continue
            sign, odd = merged
            # even generators commute with everything
            key = (odd, tuple(sorted(e1 + e2)))
            c = c1 * c2
            if sign < 0:
                c = -c
            out[key] = out[key] + c if key in out else c
    return GradedFunction(a.alg, out)


def _monomial(alg: GradedAlgebra, odd: tuple, even: tuple) -> GradedFunction:
    return GradedFunction(alg, {(odd, even): Poly.one(alg.num_vars)})


class GradedDerivation:
    """A derivation of degree ``degree`` given by its values on the base
    coordinates, the degree-1 generators and the degree-2 generators.  It acts
    by X(ab) = X(a) b + (-1)^{|X||a|} a X(b)."""

    def __init__(self, alg: GradedAlgebra, degree: int, on_coords: Sequence[GradedFunction],
                 on_odd: Sequence[GradedFunction], on_even: Sequence[GradedFunction]):
        if len(on_coords) != alg.num_vars or len(on_odd) != alg.Q.rank or len(on_even) != alg.B.rank:
            raise DimensionError("derivation images do not match the generators")
        for img, shift in ((on_coords, 0), (on_odd, 1), (on_even, 2)):
            for g in img:
                if g.terms and g.degrees() != {shift + degree}:
                    raise ValueError(f"generator image of degree {g.degrees()} for a degree {degree} derivation")
        self.alg = alg
        self.degree = degree
        self.on_coords = tuple(on_coords)
        self.on_odd = tuple(on_odd)
        self.on_even = tuple(on_even)

    @classmethod
    def zero(cls, alg: GradedAlgebra, degree: int) -> "GradedDerivation":
        z = alg.zero()
        return cls(alg, degree, [z] * alg.num_vars, [z] * alg.Q.rank, [z] * alg.B.rank)

    def on_function(self, f: Poly) -> GradedFunction:
        out = self.alg.zero()
        for a, img in enumerate(self.on_coords):
            if img.terms:
                d = f.diff(a)
                if d:
                    out = out + img.scale(d)
        return out

    def __call__(self, xi: GradedFunction) -> GradedFunction:
        return self.apply(xi)

    def apply(self, xi: GradedFunction) -> GradedFunction:
        alg = self.alg
        k = self.degree
        out = alg.zero()
        for (odd, even), c in xi.terms.items():
            mono = _monomial(alg, odd, even)
            # X(c) * mono
            xc = self.on_function(c)
            if xc.terms:
                out = out + graded_mul(xc, mono)
            # c * X(mono), odd generators first then even ones
            for s, i in enumerate(odd):
                img = self.on_odd[i]
                if not img.terms:
                    continue
                left = _monomial(alg, odd[:s], ())
                right = _monomial(alg, odd[s + 1:], even)
                term = graded_mul(graded_mul(left, img), right).scale(c)
                out = out + (term if (k * s) % 2 == 0 else -term)
            for t, j in enumerate(even):
                img = self.on_even[j]
                if not img.terms:
                    continue
                rest = _monomial(alg, odd, even[:t] + even[t + 1:])
                term = graded_mul(rest, img).scale(c)
                # moving X past the odd block costs (-1)^{k |odd|}
                out = out + (term if (k * len(odd)) % 2 == 0 else -term)
        return out

    def __add__(self, other: "GradedDerivation") -> "GradedDerivation":
        if other.degree != self.degree:
            raise ValueError("sum of derivations of different degrees")
        return GradedDerivation(self.alg, self.degree,
                                [a + b for a, b in zip(self.on_coords, other.on_coords)],
                                [a + b for a, b in zip(self.on_odd, other.on_odd)],
                                [a + b for a, b in zip(self.on_even, other.on_even)])

    def images(self) -> list[GradedFunction]:
        return list(self.on_coords) + list(self.on_odd) + list(self.on_even)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedDerivation):
            return NotImplemented
        return self.degree == other.degree and self.images() == other.images()

    __hash__ = None

    def __repr__(self) -> str:
        return f"GradedDerivation(degree {self.degree})"


def commutator(X: GradedDerivation, Y: GradedDerivation) -> GradedDerivation:
    """[X, Y] = XY - (-1)^{|X||Y|} YX, again a derivation."""
    sign = -1 if (X.degree * Y.degree) % 2 == 0 else 1

    def img(g):
        return X(Y(g)) + (Y(X(g)) if sign > 0 else -Y(X(g)))

    alg = X.alg
    return GradedDerivation(alg, X.degree + Y.degree,
                            [img(alg.coordinate(a)) for a in range(alg.num_vars)],
                            [img(alg.odd(i)) for i in range(alg.Q.rank)],
                            [img(alg.even(j)) for j in range(alg.B.rank)])


def derivation_ops(X: GradedDerivation, Y, op: str):
    """``apply`` (Y a graded function) or ``commutator`` (Y a derivation)."""
    if op == "apply":
        return X(Y)
    if op == "commutator":
        return commutator(X, Y)
    raise ValueError(f"unknown operation {op!r}")


# -- degree -2 Poisson brackets ---------------------------------------------

class PoissonBracket:
    """A degree -2 biderivation determined by its values on generators.

    ``table[(kind1, i, kind2, j)]`` is the bracket of two generators, with
    kinds ``x`` (coordinates), ``eps`` (degree 1) and ``b`` (degree 2).
    Brackets with arbitrary functions of the base use ``on_function``, which
    returns {b_j, f} for each j.
    """

    def __init__(self, alg: GradedAlgebra, table: Mapping[tuple, GradedFunction],
                 on_function: Callable[[Poly], Sequence[GradedFunction]]):
        self.alg = alg
        self.table = dict(table)
        self.on_function = on_function
        self._ad_cache: dict = {}

    def generator_bracket(self, g: tuple, h: tuple) -> GradedFunction:
        return self.table.get(g + h) or self.alg.zero()

    def ad(self, kind: str, i: int) -> GradedDerivation:
        """The derivation {g, .} for the generator (kind, i)."""
        key = (kind, i)
        if key not in self._ad_cache:
            alg = self.alg
            deg = {"x": 0, "eps": 1, "b": 2}[kind] - 2
            self._ad_cache[key] = GradedDerivation(
                alg, deg,
                [self.generator_bracket(key, ("x", a)) for a in range(alg.num_vars)],
                [self.generator_bracket(key, ("eps", k)) for k in range(alg.Q.rank)],
                [self.generator_bracket(key, ("b", j)) for j in range(alg.B.rank)])
        return self._ad_cache[key]

    def ad_function(self, f: Poly) -> GradedDerivation:
        """{f, .} = -{., f}: zero on coordinates and eps, -{b_j, f} on b_j."""
        alg = self.alg
        z = alg.zero()
        return GradedDerivation(alg, -2, [z] * alg.num_vars, [z] * alg.Q.rank,
                                [-v for v in self.on_function(f)])

    def __call__(self, xi: GradedFunction, eta: GradedFunction) -> GradedFunction:
        return self.bracket(xi, eta)

    def bracket(self, xi: GradedFunction, eta: GradedFunction) -> GradedFunction:
        alg = self.alg
        out = alg.zero()
        for (odd, even), c in xi.terms.items():
            out = out + self._bracket_monomial(c, list(("eps", i) for i in odd) + [("b", j) for j in even], eta)
        return out

    def _bracket_monomial(self, c: Poly, gens: list, eta: GradedFunction) -> GradedFunction:
        # {xi1 g, eta} = xi1 {g, eta} + (-1)^{|g||eta|} {xi1, eta} g
        alg = self.alg
        if not gens:
            if c.is_constant():
                return alg.zero()
            return self.ad_function(c)(eta)
        *head, last = gens
        kind, i = last
        g_deg = 1 if kind == "eps" else 2
        head_fn = alg.function(c)
        for k, j in head:
            head_fn = graded_mul(head_fn, alg.odd(j) if k == "eps" else alg.even(j))
        g_fn = alg.odd(i) if kind == "eps" else alg.even(i)
        out = alg.zero()
        for n in sorted(eta.degrees()):
            part = eta.component(n)
            first = graded_mul(head_fn, self.ad(kind, i)(part))
            second = graded_mul(self._bracket_monomial(c, head, part), g_fn)
            out = out + first + (second if (g_deg * n) % 2 == 0 else -second)
        return out


def poisson_from_selfdual(rep: SelfDual2Rep, truncation: int = DEFAULT_TRUNCATION) -> PoissonBracket:
    """{tau1, tau2} = <d_Q tau1, tau2>, {b, f} = rho_B(b) f, {b, tau} = nabla*_b tau,
    {b1, b2} = [b1, b2] - R(b1, b2), the rest by graded skew-symmetry."""
    Q, B = rep.Q, rep.Bm
    alg = GradedAlgebra(Q, B, truncation)
    p = alg.num_vars
    Qs = Q.dual()
    table: dict = {}
    for j in range(B.rank):
        b = B.frame(j)
        X = rep.B.rho(b)
        for a in range(p):
            v = alg.function(X(Poly.var(a, p)))
            table[("b", j, "x", a)] = v
            table[("x", a, "b", j)] = -v
        for k in range(Q.rank):
            v = alg.one_form(rep.nablaQstar(b, Qs.frame(k)))
            table[("b", j, "eps", k)] = v
            table[("eps", k, "b", j)] = -v          # -(-1)^{1*2}
        for l in range(B.rank):
            b2 = B.frame(l)
            v = alg.b_section(rep.bracket(b, b2)) - alg.form(2, lambda q1, q2: rep.R_form(b, b2, q1, q2))
            table[("b", j, "b", l)] = v
    for k in range(Q.rank):
        for l in range(Q.rank):
            table[("eps", k, "eps", l)] = alg.function(rep.dQ(Qs.frame(k)).dot(Qs.frame(l)))

    def on_function(f: Poly):
        return [alg.function(rep.B.rho(B.frame(j))(f)) for j in range(B.rank)]

    return PoissonBracket(alg, table, on_function)


def _sample_elements(alg: GradedAlgebra, checker: Checker, bound: int) -> list[GradedFunction]:
    """Generators, sample base functions, and a few random products of
    degree at most ``bound``."""
    gens = [g for _, _, g in alg.generators()]
    if alg.num_vars:
        gens.append(alg.function(checker.random_poly(alg.num_vars)))
    products = []
    pool = [g for g in gens if g.degree > 0]
    rng = checker.rng
    for _ in range(4):
        if len(pool) < 2:
            break
        a, b = rng.sample(pool, 2)
        if a.degree + b.degree <= bound:
            f = alg.function(checker.random_poly(alg.num_vars)) if alg.num_vars else alg.function(1)
            prod = graded_mul(graded_mul(f, a), b)
            if prod.terms:
                products.append(prod)
    return gens + products


def _zero_entry(axiom: str, items: Iterable[tuple[tuple, GradedFunction]]) -> CheckEntry:
    from .linalg import witness_for
    for frames, value in items:
        for k, c in enumerate(value.flat()):
            if c:
                return CheckEntry(axiom, False, witness_for(c, tuple(frames) + (k,)))
    return CheckEntry(axiom, True)


def check_poisson_axioms(bracket: PoissonBracket, sample_bound: int = 4,
                         checker: Checker | None = None) -> CheckReport:
    """Graded skew-symmetry, Leibniz and Jacobi identities on generators and
    on random products of degree at most ``sample_bound``."""
    checker = checker or Checker()
    alg = bracket.alg
    br = bracket
    elems = _sample_elements(alg, checker, sample_bound)
    D = alg.truncation

    def deg(x):
        return x.degree

    def skew():
        for i, a in enumerate(elems):
            for j, b in enumerate(elems):
                s = 1 if (deg(a) * deg(b)) % 2 == 0 else -1
                yield (i, j), br(a, b) + br(b, a).scale(s)

    def leibniz():
        for i, a in enumerate(elems):
            for j, b in enumerate(elems):
                for k, c in enumerate(elems):
                    if deg(b) + deg(c) > D or deg(a) + deg(b) + deg(c) - 2 > D:
                        continue
                    s = 1 if (deg(a) * deg(b)) % 2 == 0 else -1
                    lhs = br(a, graded_mul(b, c))
                    rhs = graded_mul(br(a, b), c) + graded_mul(b, br(a, c)).scale(s)
                    yield (i, j, k), lhs - rhs

    def jacobi():
        for i, a in enumerate(elems):
            for j, b in enumerate(elems):
                for k, c in enumerate(elems):
                    s = 1 if (deg(a) * deg(b)) % 2 == 0 else -1
                    lhs = br(a, br(b, c))
                    rhs = br(br(a, b), c) + br(b, br(a, c)).scale(s)
                    yield (i, j, k), lhs - rhs

    report = CheckReport()
    report.add(_zero_entry("graded_skew", skew()))
    report.add(_zero_entry("graded_leibniz", leibniz()))
    report.add(_zero_entry("graded_jacobi", jacobi()))
    return report


# -- homological vector fields -------------------------------------------

def homological_from_lie2(L: SplitLie2, truncation: int = DEFAULT_TRUNCATION) -> GradedDerivation:
    """Q(f) = rho_Q^* df,  Q(tau) = d_Q tau + d_B tau,  Q(b) = d_nabla b - <omega, b>."""
    Qm, B = L.Qm, L.B
    alg = GradedAlgebra(Qm, B, truncation)
    p = alg.num_vars
    Qs = Qm.dual()
    br = L.dull
    on_coords = [alg.one_form(L.Q.rho_star_d(Poly.var(a, p))) for a in range(p)]
    on_odd = []
    for k in range(Qm.rank):
        t = Qs.frame(k)
        dq = alg.form(2, lambda q1, q2: (L.Q.rho(q1)(t.dot(q2)) - L.Q.rho(q2)(t.dot(q1))
                                         - t.dot(br(q1, q2))))
        on_odd.append(dq + alg.b_section(L.dB(t)))
    on_even = []
    for j in range(B.rank):
        b = B.frame(j)
        dn = alg.b_valued_one_form(lambda q: L.nabla(q, b))
        w = alg.form(3, lambda q1, q2, q3: L.omega(q1, q2, q3).dot(b))
        on_even.append(dn - w)
    return GradedDerivation(alg, 1, on_coords, on_odd, on_even)


def check_homological(Qv: GradedDerivation, checker: Checker | None = None) -> CheckReport:
    """Q o Q = 0 on every generator, plus random products as a spot check."""
    if Qv.degree != 1:
        raise ValueError("a homological vector field has degree 1")
    checker = checker or Checker()
    alg = Qv.alg
    report = CheckReport()
    for kind, label in (("x", "Q2_coordinates"), ("eps", "Q2_degree1"), ("b", "Q2_degree2")):
        gens = [(i, g) for k, i, g in alg.generators() if k == kind]
        report.add(_zero_entry(label, (((i,), Qv(Qv(g))) for i, g in gens)))
    samples = _sample_elements(alg, checker, max(alg.truncation - 2, 0))
    report.add(_zero_entry("Q2_products", (((i,), Qv(Qv(s))) for i, s in enumerate(samples)
                                             if s.degree + 2 <= alg.truncation)))
    return report


def check_Q_poisson_compat(Qv: GradedDerivation, bracket: PoissonBracket) -> CheckReport:
    """Q{a, b} = {Q a, b} + (-1)^{|a|} {a, Q b} on the six kinds of generator pairs."""
    alg = Qv.alg
    if not alg.compatible(bracket.alg):
        raise DimensionError("homological vector field and bracket on different [2]-manifolds")
    fns = [(("x", a), alg.coordinate(a)) for a in range(alg.num_vars)]
    taus = [(("eps", i), alg.odd(i)) for i in range(alg.Q.rank)]
    bs = [(("b", j), alg.even(j)) for j in range(alg.B.rank)]

    def residual(a, b):
        s = 1 if a.degree % 2 == 0 else -1
        return Qv(bracket(a, b)) - bracket(Qv(a), b) - bracket(a, Qv(b)).scale(s)

    report = CheckReport()
    for label, left, right in (("(f,f)", fns, fns), ("(tau,f)", taus, fns), ("(b,f)", bs, fns),
                               ("(b,tau)", bs, taus), ("(tau,tau)", taus, taus), ("(b,b)", bs, bs)):
        items = (((ka[1], kb[1]), residual(a, b)) for ka, a in left for kb, b in right)
        report.add(_zero_entry(f"compat{label}", items))
    return report


# -- morphisms of split [2]-manifolds ---------------------------------------

class SplitMorphism:
    """A morphism from Q1[-1] + B1*[-2] over the first base to Q2[-1] + B2*[-2]
    over the second, given by

    * ``mu0``: polynomials in the first base's coordinates, one per coordinate
      of the second base;
    * ``mu1[k][i]``: the Q1 -> Q2 matrix, so mu*(eps2^k) = sum_i mu1[k][i] eps1^i;
    * ``mu2[l][j]``: mu*(b2_l) has B1-part sum_j mu2[l][j] b1_j;
    * ``mu12``: 2-forms on Q1, one per degree-2 generator of the target:
      the Lambda^2 Q1^* part of mu*(b2_l).
    """

    def __init__(self, source: GradedAlgebra, target: GradedAlgebra, mu0: Sequence[Poly],
                 mu1: Sequence[Sequence[Poly]], mu2: Sequence[Sequence[Poly]],
                 mu12: Sequence[GradedFunction] | None = None):
        if len(mu0) != target.num_vars:
            raise DimensionError("mu0 needs one polynomial per target coordinate")
        if len(mu1) != target.Q.rank or any(len(r) != source.Q.rank for r in mu1):
            raise DimensionError("mu1 must be a rank(Q2) x rank(Q1) matrix")
        if len(mu2) != target.B.rank or any(len(r) != source.B.rank for r in mu2):
            raise DimensionError("mu2 must be a rank(B2) x rank(B1) matrix")
        mu12 = list(mu12) if mu12 is not None else [source.zero()] * target.B.rank
        for f in mu12:
            if f.terms and (f.degrees() != {2} or any(e for _, e in f.terms)):
                raise ValueError("mu12 entries must be 2-forms on Q1")
        self.source, self.target = source, target
        self.mu0, self.mu1, self.mu2, self.mu12 = tuple(mu0), mu1, mu2, mu12

    @classmethod
    def identity(cls, alg: GradedAlgebra) -> "SplitMorphism":
        p = alg.num_vars
        one, zero = Poly.one(p), Poly.zero(p)
        n, m = alg.Q.rank, alg.B.rank
        return cls(alg, alg, [Poly.var(a, p) for a in range(p)],
                   [[one if i == k else zero for i in range(n)] for k in range(n)],
                   [[one if i == k else zero for i in range(m)] for k in range(m)])

    def pullback(self, xi: GradedFunction) -> GradedFunction:
        src = self.source
        out = src.zero()
        for (odd, even), c in xi.terms.items():
            term = src.function(c.compose_into(self.mu0, src.num_vars))
            for k in odd:
                term = graded_mul(term, src.one_form(self.mu1[k]))
            for l in even:
                term = graded_mul(term, src.b_section(self.mu2[l]) + self.mu12[l])
            out = out + term
        return out


def morphism_pullback(mu0, mu1, mu2, mu12, source: GradedAlgebra, target: GradedAlgebra) -> SplitMorphism:
    return SplitMorphism(source, target, mu0, mu1, mu2, mu12)


def check_lie2_morphism(mu: SplitMorphism, Q1: GradedDerivation, Q2: GradedDerivation) -> CheckReport:
    """mu^* o Q2 = Q1 o mu^* on the generators of the target algebra."""
    if not (Q1.alg.compatible(mu.source) and Q2.alg.compatible(mu.target)):
        raise DimensionError("homological vector fields do not match the morphism's manifolds")
    report = CheckReport()
    for kind, label in (("x", "morphism_coordinates"), ("eps", "morphism_degree1"), ("b", "morphism_degree2")):
        items = (((i,), mu.pullback(Q2(g)) - Q1(mu.pullback(g)))
                 for k, i, g in mu.target.generators() if k == kind)
        report.add(_zero_entry(label, items))
    return report
