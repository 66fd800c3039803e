"""Exact polynomials over the rationals and polynomial vector fields.

Polynomials live in ``num_vars`` coordinates ``x1 .. xp`` and play the role
of smooth functions on an affine base.  Every operation is exact.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence, Union

Scalar = Union[int, Fraction]


class DimensionError(ValueError):
    """Raised when objects over different base dimensions are combined."""


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact scalar: {c!r}")


def _add_exp(a: tuple, b: tuple) -> tuple:
    return tuple(i + j for i, j in zip(a, b))


class Poly:
    """Sparse polynomial with rational coefficients.

    ``terms`` maps exponent tuples of length ``num_vars`` to nonzero
    ``Fraction`` coefficients.  Instances are treated as immutable.
    """

    __slots__ = ("num_vars", "terms", "_hash")

    def __init__(self, num_vars: int, terms: Mapping[tuple, Scalar] | None = None):
        self.num_vars = num_vars
        clean: dict[tuple, Fraction] = {}
        if terms:
            for exp, c in terms.items():
                if len(exp) != num_vars:
                    raise DimensionError(f"exponent {exp} does not have {num_vars} entries")
                c = _frac(c)
                if c:
                    clean[tuple(exp)] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, num_vars: int, terms: dict) -> "Poly":
        # terms already cleaned (Fraction values, no zeros)
        p = object.__new__(cls)
        p.num_vars = num_vars
        p.terms = terms
        p._hash = None
        return p

    # constructors
    @classmethod
    def zero(cls, num_vars: int) -> "Poly":
        return cls._raw(num_vars, {})

    @classmethod
    def const(cls, c: Scalar, num_vars: int) -> "Poly":
        c = _frac(c)
        return cls._raw(num_vars, {(0,) * num_vars: c} if c else {})

    @classmethod
    def one(cls, num_vars: int) -> "Poly":
        return cls.const(1, num_vars)

    @classmethod
    def var(cls, i: int, num_vars: int) -> "Poly":
        """The coordinate function x_{i+1} (0-based index ``i``)."""
        if not 0 <= i < num_vars:
            raise DimensionError(f"variable index {i} out of range for {num_vars} variables")
        exp = [0] * num_vars
        exp[i] = 1
        return cls._raw(num_vars, {tuple(exp): Fraction(1)})

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff: Scalar = 1) -> "Poly":
        return cls(len(exp), {tuple(exp): coeff})

    # coercion
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.num_vars != self.num_vars:
                raise DimensionError(
                    f"polynomials in {self.num_vars} and {other.num_vars} variables")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(other, self.num_vars)
        return NotImplemented

    # queries
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.num_vars, Fraction(0))

    def degree(self) -> int:
        """Total degree; the zero polynomial has degree -1."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    # arithmetic
    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s += c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Poly._raw(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.terms or not other.terms:
            return Poly._raw(self.num_vars, {})
        out: dict[tuple, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _add_exp(e1, e2)
                s = out.get(e)
                out[e] = c1 * c2 if s is None else s + c1 * c2
        return Poly._raw(self.num_vars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def scale(self, c: Scalar) -> "Poly":
        c = _frac(c)
        if not c:
            return Poly._raw(self.num_vars, {})
        return Poly._raw(self.num_vars, {e: c * v for e, v in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        out = Poly.one(self.num_vars)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other, self.num_vars)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num_vars, frozenset(self.terms.items())))
        return self._hash

    # calculus
    def diff(self, i: int) -> "Poly":
        """Formal partial derivative in the 0-based variable ``i``."""
        if not 0 <= i < self.num_vars:
            raise DimensionError(f"variable index {i} out of range for {self.num_vars} variables")
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                out[ne] = c * k
        return Poly._raw(self.num_vars, out)

    def compose(self, subs: Sequence["Poly"]) -> "Poly":
        """Substitute polynomials (all in the same number of variables) for x1 .. xp."""
        if len(subs) != self.num_vars:
            raise DimensionError(f"{len(subs)} substitutions for {self.num_vars} variables")
        if not subs:
            raise DimensionError("composition needs the target number of variables; use compose_into")
        return self.compose_into(subs, subs[0].num_vars)

    def compose_into(self, subs: Sequence["Poly"], num_vars: int) -> "Poly":
        if len(subs) != self.num_vars:
            raise DimensionError(f"{len(subs)} substitutions for {self.num_vars} variables")
        out = Poly.zero(num_vars)
        for e, c in self.terms.items():
            t = Poly.const(c, num_vars)
            for s, k in zip(subs, e):
                if k:
                    t = t * s ** k
            out = out + t
        return out

    def __call__(self, *point: Scalar) -> Fraction:
        return self.evaluate(point)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        if len(point) != self.num_vars:
            raise DimensionError(f"point of length {len(point)} for {self.num_vars} variables")
        pt = [_frac(v) for v in point]
        total = Fraction(0)
        for e, c in self.terms.items():
            t = c
            for v, k in zip(pt, e):
                if k:
                    t *= v ** k
            total += t
        return total

    def nonzero_point(self) -> tuple[Fraction, ...] | None:
        """A rational point where the polynomial does not vanish.

        A nonzero polynomial of degree ``d`` cannot vanish on the whole grid
        ``{0..d}^p``, so a search over that grid always succeeds.
        """
        if not self.terms:
            return None
        d = self.degree()
        # try points closest to the origin first
        grid = sorted(product(range(d + 1), repeat=self.num_vars), key=lambda t: (sum(t), t))
        for pt in grid:
            if self.evaluate(pt):
                return tuple(Fraction(v) for v in pt)
        raise AssertionError("unreachable: nonzero polynomial vanished on its grid")

    # display
    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        return self.format()

    def format(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        if names is None:
            names = [f"x{i + 1}" for i in range(self.num_vars)]
        pieces = []
        for e in sorted(self.terms, key=lambda t: (-sum(t), tuple(-k for k in t))):
            c = self.terms[e]
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if mono and a == 1:
                body = mono
            elif mono:
                body = f"{a}*{mono}"
            else:
                body = str(a)
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out


def variables(num_vars: int) -> list[Poly]:
    """The coordinate functions x1 .. xp."""
    return [Poly.var(i, num_vars) for i in range(num_vars)]


def poly_sum(items: Iterable[Poly], num_vars: int) -> Poly:
    out = Poly.zero(num_vars)
    for it in items:
        out = out + it
    return out


def poly_arith(a: Poly, b: Poly, op: str):
    """Dispatch one of ``add``, ``mul``, ``scale`` or ``equal``.

    For ``scale`` the second argument must be a constant polynomial or a
    rational number.
    """
    if isinstance(b, Poly) and a.num_vars != b.num_vars:
        raise DimensionError(f"polynomials in {a.num_vars} and {b.num_vars} variables")
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "scale":
        if isinstance(b, Poly):
            if not b.is_constant():
                raise ValueError("scale expects a constant")
            b = b.constant_term()
        return a.scale(b)
    if op == "equal":
        return a == b
    raise ValueError(f"unknown operation {op!r}")


class Derivation:
    """A polynomial vector field  sum_i X_i d/dx_i."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Poly]):
        comps = tuple(components)
        if comps:
            n = len(comps)
            for c in comps:
                if c.num_vars != n:
                    raise DimensionError(
                        f"vector field with {n} components has a coefficient in {c.num_vars} variables")
        self.components = comps

    @property
    def num_vars(self) -> int:
        return len(self.components)

    @classmethod
    def zero(cls, num_vars: int) -> "Derivation":
        return cls([Poly.zero(num_vars)] * num_vars)

    @classmethod
    def partial(cls, i: int, num_vars: int) -> "Derivation":
        return cls([Poly.const(1 if j == i else 0, num_vars) for j in range(num_vars)])

    def _check(self, other: "Derivation") -> None:
        if self.num_vars != other.num_vars:
            raise DimensionError(f"vector fields on {self.num_vars} and {other.num_vars} coordinates")

    def __call__(self, f: Poly) -> Poly:
        return apply_derivation(self, f)

    def __add__(self, other: "Derivation") -> "Derivation":
        self._check(other)
        return Derivation([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "Derivation") -> "Derivation":
        self._check(other)
        return Derivation([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "Derivation":
        return Derivation([-a for a in self.components])

    def __mul__(self, f) -> "Derivation":
        return Derivation([f * a for a in self.components])

    __rmul__ = __mul__

    def bracket(self, other: "Derivation") -> "Derivation":
        """Lie bracket [X, Y] = XY - YX, computed componentwise."""
        self._check(other)
        return Derivation([self(b) - other(a) for a, b in zip(self.components, other.components)])

    def is_zero(self) -> bool:
        return not any(self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Derivation):
            return NotImplemented
        return self.components == other.components

    def __hash__(self) -> int:
        return hash(self.components)

    def __repr__(self) -> str:
        parts = [f"({c})*d{i + 1}" for i, c in enumerate(self.components) if c]
        return "Derivation(" + (" + ".join(parts) or "0") + ")"


def apply_derivation(X: Derivation, f: Poly) -> Poly:
    """X(f) = sum_i X_i * df/dx_i."""
    if X.num_vars != f.num_vars:
        raise DimensionError(f"vector field on {X.num_vars} coordinates applied to a function of {f.num_vars}")
    out = Poly.zero(f.num_vars)
    for i, c in enumerate(X.components):
        if c:
            d = f.diff(i)
            if d:
                out = out + c * d
    return out


def differential(f: Poly) -> tuple[Poly, ...]:
    """The gradient (df/dx1, ..., df/dxp) as a covector."""
    return tuple(f.diff(i) for i in range(f.num_vars))


def pair_covector(xi: Sequence[Poly], X: Derivation) -> Poly:
    """Contraction of a covector with a vector field."""
    if len(xi) != X.num_vars:
        raise DimensionError("covector and vector field over different bases")
    return poly_sum((a * b for a, b in zip(xi, X.components)), X.num_vars)
