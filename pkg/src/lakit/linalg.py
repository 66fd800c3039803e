"""Free modules over the base ring, multilinear tensor maps, constant metrics
and constant subbundles.

Sections of a free module of rank ``r`` are ``Section`` tuples of ``r``
polynomials, the coefficients in the implicit global frame.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, NamedTuple, Sequence

import sympy

from .basering import DimensionError, Poly


class Section(tuple):
    """Coefficients of a section in the global frame, with module arithmetic."""

    __slots__ = ()

    def __new__(cls, items: Iterable[Poly]):
        return super().__new__(cls, items)

    def __add__(self, other: "Section") -> "Section":
        if len(self) != len(other):
            raise DimensionError(f"sections of rank {len(self)} and {len(other)}")
        return Section(a + b for a, b in zip(self, other))

    def __sub__(self, other: "Section") -> "Section":
        if len(self) != len(other):
            raise DimensionError(f"sections of rank {len(self)} and {len(other)}")
        return Section(a - b for a, b in zip(self, other))

    def __neg__(self) -> "Section":
        return Section(-a for a in self)

    def __mul__(self, f) -> "Section":
        return Section(f * a for a in self)

    __rmul__ = __mul__

    def dot(self, other: Sequence[Poly]) -> Poly:
        """Natural pairing of a section with a section of the dual module."""
        if len(self) != len(other):
            raise DimensionError(f"pairing sections of rank {len(self)} and {len(other)}")
        out = None
        for a, b in zip(self, other):
            if a and b:
                out = a * b if out is None else out + a * b
        if out is None:
            return _zero_like(self, other)
        return out

    def is_zero(self) -> bool:
        return not any(self)

    def __repr__(self) -> str:
        return "Section(" + ", ".join(str(a) for a in self) + ")"


def _zero_like(*secs) -> Poly:
    for s in secs:
        for a in s:
            return Poly.zero(a.num_vars)
    # rank zero: the base dimension is unknown but irrelevant for a zero value
    return Poly.zero(0)


def section(items: Iterable, num_vars: int) -> Section:
    """Build a section from polynomials or rational constants."""
    return Section(a if isinstance(a, Poly) else Poly.const(a, num_vars) for a in items)


@dataclass(frozen=True)
class FreeModule:
    """A trivial vector bundle of the given rank over affine ``num_vars``-space."""

    name: str
    rank: int
    num_vars: int

    def dual(self) -> "FreeModule":
        name = self.name[:-1] if self.name.endswith("*") else self.name + "*"
        return FreeModule(name, self.rank, self.num_vars)

    def frame(self, i: int) -> Section:
        return Section(Poly.const(1 if j == i else 0, self.num_vars) for j in range(self.rank))

    def frames(self) -> list[Section]:
        return [self.frame(i) for i in range(self.rank)]

    def zero(self) -> Section:
        return Section(Poly.zero(self.num_vars) for _ in range(self.rank))

    def section(self, items: Iterable) -> Section:
        s = section(items, self.num_vars)
        if len(s) != self.rank:
            raise DimensionError(f"{self.name} has rank {self.rank}, got {len(s)} coefficients")
        return s


def trivial_line(num_vars: int) -> FreeModule:
    """The rank-one trivial bundle; scalar-valued forms take values here."""
    return FreeModule("R", 1, num_vars)


def same_module(a: FreeModule, b: FreeModule) -> bool:
    return a.rank == b.rank and a.num_vars == b.num_vars


class Witness(NamedTuple):
    """Evidence that an identity fails: a nonzero polynomial, a rational point
    where it does not vanish, and the frame indices where it was found."""

    poly: Poly
    point: tuple
    frames: tuple


def witness_for(poly: Poly, frames: Sequence[int]) -> Witness:
    return Witness(poly, poly.nonzero_point(), tuple(frames))


class SymmetryError(ValueError):
    pass


class TensorMap:
    """A multilinear map  inputs[0] x ... x inputs[k-1] -> output  with
    polynomial coefficients.

    ``coeffs`` maps an index tuple ``(i_1, .., i_k, j)`` to the ``j``-th
    component of T(e_{i_1}, .., e_{i_k}); missing keys are zero.  ``symmetry``
    is a tuple of tags ``("sym", a, b)`` or ``("alt", a, b)`` naming input
    slots, validated at construction.
    """

    __slots__ = ("inputs", "output", "coeffs", "symmetry")

    def __init__(self, inputs: Sequence[FreeModule], output: FreeModule,
                 coeffs: dict | None = None, symmetry: Sequence[tuple] = ()):
        self.inputs = tuple(inputs)
        self.output = output
        nv = output.num_vars
        for m in self.inputs:
            if m.num_vars != nv:
                raise DimensionError("tensor slots over different bases")
        clean = {}
        for key, c in (coeffs or {}).items():
            key = tuple(key)
            if len(key) != len(self.inputs) + 1:
                raise DimensionError(f"index {key} has wrong length")
            for k, m in zip(key, self.inputs + (output,)):
                if not 0 <= k < m.rank:
                    raise DimensionError(f"index {key} out of range")
            if not isinstance(c, Poly):
                c = Poly.const(c, nv)
            if c.num_vars != nv:
                raise DimensionError("coefficient over the wrong base")
            if c:
                clean[key] = c
        self.coeffs = clean
        self.symmetry = tuple(tuple(t) for t in symmetry)
        self._validate_symmetry()

    @property
    def num_vars(self) -> int:
        return self.output.num_vars

    @property
    def arity(self) -> int:
        return len(self.inputs)

    def coeff(self, key: Sequence[int]) -> Poly:
        return self.coeffs.get(tuple(key)) or Poly.zero(self.num_vars)

    def _validate_symmetry(self) -> None:
        for tag in self.symmetry:
            kind, a, b = tag
            if kind not in ("sym", "alt"):
                raise SymmetryError(f"unknown symmetry tag {kind!r}")
            if not (0 <= a < self.arity and 0 <= b < self.arity and a != b):
                raise SymmetryError(f"symmetry tag {tag} does not name two input slots")
            if not same_module(self.inputs[a], self.inputs[b]):
                raise SymmetryError(f"symmetry tag {tag} relates slots of different modules")
            sign = 1 if kind == "sym" else -1
            for key in self.all_keys():
                swapped = list(key)
                swapped[a], swapped[b] = swapped[b], swapped[a]
                c1 = self.coeff(key)
                c2 = self.coeff(swapped)
                if c1 != c2 * sign:
                    raise SymmetryError(
                        f"{kind}({a},{b}) violated at index {key}: {c1} vs {c2}")

    def all_keys(self):
        return product(*(range(m.rank) for m in self.inputs + (self.output,)))

    @classmethod
    def from_function(cls, inputs: Sequence[FreeModule], output: FreeModule,
                      fn: Callable[..., Sequence[Poly]], symmetry: Sequence[tuple] = ()) -> "TensorMap":
        """Tabulate ``fn`` on frame tuples."""
        coeffs = {}
        for idx in product(*(range(m.rank) for m in inputs)):
            val = fn(*(m.frame(i) for m, i in zip(inputs, idx)))
            if len(val) != output.rank:
                raise DimensionError("function value has the wrong rank")
            for j, c in enumerate(val):
                if c:
                    coeffs[idx + (j,)] = c
        return cls(inputs, output, coeffs, symmetry)

    @classmethod
    def zero(cls, inputs: Sequence[FreeModule], output: FreeModule,
             symmetry: Sequence[tuple] = ()) -> "TensorMap":
        return cls(inputs, output, {}, symmetry)

    @classmethod
    def identity(cls, module: FreeModule) -> "TensorMap":
        return cls((module,), module, {(i, i): 1 for i in range(module.rank)})

    def __call__(self, *args: Sequence[Poly]) -> Section:
        return tensor_eval(self, *args)

    def _same_signature(self, other: "TensorMap") -> None:
        if (len(self.inputs) != len(other.inputs)
                or not all(same_module(a, b) for a, b in zip(self.inputs, other.inputs))
                or not same_module(self.output, other.output)):
            raise DimensionError("tensor maps with different signatures")

    def __add__(self, other: "TensorMap") -> "TensorMap":
        self._same_signature(other)
        coeffs = dict(self.coeffs)
        for k, c in other.coeffs.items():
            coeffs[k] = coeffs[k] + c if k in coeffs else c
        sym = tuple(t for t in self.symmetry if t in other.symmetry)
        return TensorMap(self.inputs, self.output, coeffs, sym)

    def __neg__(self) -> "TensorMap":
        return TensorMap(self.inputs, self.output, {k: -c for k, c in self.coeffs.items()}, self.symmetry)

    def __sub__(self, other: "TensorMap") -> "TensorMap":
        return self + (-other)

    def scale(self, f) -> "TensorMap":
        return TensorMap(self.inputs, self.output, {k: f * c for k, c in self.coeffs.items()}, self.symmetry)

    def with_symmetry(self, symmetry: Sequence[tuple]) -> "TensorMap":
        return TensorMap(self.inputs, self.output, self.coeffs, symmetry)

    def swap_slots(self, a: int, b: int) -> "TensorMap":
        """T'(.., x_a, .., x_b, ..) = T(.., x_b, .., x_a, ..); symmetry tags are dropped."""
        if not same_module(self.inputs[a], self.inputs[b]):
            raise DimensionError("swapped slots must take the same module")

        def sw(k):
            k = list(k)
            k[a], k[b] = k[b], k[a]
            return tuple(k)

        return TensorMap(self.inputs, self.output, {sw(k[:-1]) + k[-1:]: c for k, c in self.coeffs.items()})

    def transpose(self) -> "TensorMap":
        """Dual of a one-slot map  V -> W  as the map  W* -> V*."""
        if self.arity != 1:
            raise DimensionError("transpose needs a one-slot map")
        return TensorMap((self.output.dual(),), self.inputs[0].dual(),
                         {(j, i): c for (i, j), c in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorMap):
            return NotImplemented
        return tensor_equal(self, other)[0]

    __hash__ = None

    def __repr__(self) -> str:
        ins = ", ".join(m.name for m in self.inputs)
        return f"TensorMap(({ins}) -> {self.output.name}, {len(self.coeffs)} nonzero)"


def tensor_eval(T: TensorMap, *args: Sequence[Poly]) -> Section:
    """Multilinear contraction of T with the given sections."""
    if len(args) != T.arity:
        raise DimensionError(f"tensor of arity {T.arity} applied to {len(args)} arguments")
    for a, m in zip(args, T.inputs):
        if len(a) != m.rank:
            raise DimensionError(f"argument of rank {len(a)} in a slot of {m.name} (rank {m.rank})")
    nv = T.num_vars
    out: list = [None] * T.output.rank
    for key, c in T.coeffs.items():
        term = c
        for a, i in zip(args, key):
            x = a[i]
            if not x:
                term = None
                break
            if not x.is_constant() or x.constant_term() != 1:
                term = term * x
        if term is None:
            continue
        j = key[-1]
        out[j] = term if out[j] is None else out[j] + term
    return Section(o if o is not None else Poly.zero(nv) for o in out)


def tensor_equal(S: TensorMap, T: TensorMap) -> tuple[bool, Witness | None]:
    """Coefficientwise equality with a witness for the first difference."""
    S._same_signature(T)
    for key in sorted(set(S.coeffs) | set(T.coeffs)):
        d = S.coeff(key) - T.coeff(key)
        if d:
            return False, witness_for(d, key)
    return True, None


# -- exact rational linear algebra (delegated to sympy) ---------------------

def _to_sympy(rows: Sequence[Sequence]) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(Fraction(v).numerator, Fraction(v).denominator) for v in r]
                         for r in rows])


def _from_sympy(M: sympy.Matrix) -> list[list[Fraction]]:
    return [[Fraction(int(M[i, j].p), int(M[i, j].q)) for j in range(M.cols)] for i in range(M.rows)]


def rational_rank(rows: Sequence[Sequence]) -> int:
    if not rows or not rows[0]:
        return 0
    return _to_sympy(rows).rank()


def rational_inverse(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    M = _to_sympy(rows)
    if M.rows and M.det() == 0:
        raise ValueError("matrix is singular")
    return _from_sympy(M.inv()) if M.rows else []


def rational_nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of {v : rows . v = 0} in Q^ncols."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    out = []
    for v in _to_sympy(rows).nullspace():
        out.append([Fraction(int(x.p), int(x.q)) for x in v])
    return out


def rational_rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], tuple[int, ...]]:
    if not rows:
        return [], ()
    M, piv = _to_sympy(rows).rref()
    return _from_sympy(M)[:len(piv)], tuple(piv)


# -- metrics ----------------------------------------------------------------

class Metric:
    """A constant symmetric bilinear form on a free module."""

    def __init__(self, module: FreeModule, gram: Sequence[Sequence], nondegenerate: bool | None = None):
        n = module.rank
        g = [[Fraction(v) for v in row] for row in gram]
        if len(g) != n or any(len(r) != n for r in g):
            raise DimensionError(f"gram matrix must be {n}x{n}")
        for i in range(n):
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise SymmetryError(f"gram matrix not symmetric at ({i},{j})")
        self.module = module
        self.gram = tuple(tuple(r) for r in g)
        full = rational_rank(g) == n
        if nondegenerate and not full:
            raise ValueError("gram matrix flagged nondegenerate is singular")
        self.nondegenerate = full if nondegenerate is None else nondegenerate
        self._inverse = tuple(tuple(r) for r in rational_inverse(g)) if full else None

    def pair(self, s: Sequence[Poly], t: Sequence[Poly]) -> Poly:
        if not self.module.rank:            # empty sections do not know the base
            return Poly.zero(self.module.num_vars)
        return Section(s).dot(self.lower(t))

    def lower(self, s: Sequence[Poly]) -> Section:
        """The covector <s, .> as a section of the dual module."""
        return _matvec(self.gram, s, self.module.num_vars)

    def raise_(self, t: Sequence[Poly]) -> Section:
        if self._inverse is None:
            raise ValueError("cannot raise indices with a degenerate metric")
        return _matvec(self._inverse, t, self.module.num_vars)

    def lower_output(self, T: TensorMap) -> TensorMap:
        return _compose_output(self.gram, T, self.module.dual())

    def raise_output(self, T: TensorMap) -> TensorMap:
        if self._inverse is None:
            raise ValueError("cannot raise indices with a degenerate metric")
        return _compose_output(self._inverse, T, self.module)

    @classmethod
    def identity(cls, module: FreeModule) -> "Metric":
        n = module.rank
        return cls(module, [[int(i == j) for j in range(n)] for i in range(n)])

    def __repr__(self) -> str:
        return f"Metric({self.module.name}, {[list(map(str, r)) for r in self.gram]})"


def _matvec(M, s: Sequence[Poly], num_vars: int) -> Section:
    out = []
    for row in M:
        acc = Poly.zero(num_vars)
        for m, x in zip(row, s):
            if m and x:
                acc = acc + x.scale(m)
        out.append(acc)
    return Section(out)


def _compose_output(M, T: TensorMap, new_output: FreeModule) -> TensorMap:
    coeffs: dict = {}
    for key, c in T.coeffs.items():
        j = key[-1]
        for i, row in enumerate(M):
            if row[j]:
                k = key[:-1] + (i,)
                coeffs[k] = coeffs[k] + c.scale(row[j]) if k in coeffs else c.scale(row[j])
    return TensorMap(T.inputs, new_output, coeffs, T.symmetry)


def raise_lower(g: Metric, s, direction: str = "lower"):
    """Apply the musical isomorphism of ``g`` to a section or to the output
    slot of a tensor map."""
    if direction not in ("lower", "raise"):
        raise ValueError("direction is 'lower' or 'raise'")
    if isinstance(s, TensorMap):
        return g.lower_output(s) if direction == "lower" else g.raise_output(s)
    return g.lower(s) if direction == "lower" else g.raise_(s)


# -- constant subbundles ----------------------------------------------------

class SubBundle:
    """The span of constant, linearly independent sections of a free module."""

    def __init__(self, ambient: FreeModule, basis: Sequence[Sequence]):
        rows = [[Fraction(v) for v in b] for b in basis]
        for r in rows:
            if len(r) != ambient.rank:
                raise DimensionError(f"basis vector of length {len(r)} in {ambient.name} (rank {ambient.rank})")
        if rows and rational_rank(rows) != len(rows):
            raise ValueError("subbundle basis is linearly dependent")
        self.ambient = ambient
        self.basis = tuple(tuple(r) for r in rows)
        self._rref, self._pivots = rational_rref(rows)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @classmethod
    def full(cls, ambient: FreeModule) -> "SubBundle":
        n = ambient.rank
        return cls(ambient, [[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, ambient: FreeModule) -> "SubBundle":
        return cls(ambient, [])

    def sections(self) -> list[Section]:
        return [self.ambient.section(b) for b in self.basis]

    def residual(self, s: Sequence[Poly]) -> Section:
        """Remainder of ``s`` after subtracting its projection on the span;
        zero exactly when ``s`` is a section of the subbundle."""
        s = Section(s)
        out = list(s)
        for row, p in zip(self._rref, self._pivots):
            c = s[p]
            if c:
                for k, v in enumerate(row):
                    if v:
                        out[k] = out[k] - c.scale(v)
        return Section(out)

    def contains(self, s: Sequence[Poly]) -> bool:
        return self.residual(s).is_zero()

    def coordinates(self, s: Sequence[Poly]) -> list[Poly] | None:
        """Polynomial coefficients of ``s`` in ``self.basis``, or None."""
        if not self.contains(s):
            return None
        # coordinates against the rref rows, then T with rref = T . basis
        rref_coords = [s[p] for p in self._pivots]
        if not self.basis:
            return []
        T = _solve_change(_to_sympy(self.basis), _to_sympy(self._rref))
        out = []
        for j in range(len(self.basis)):
            acc = Poly.zero(self.ambient.num_vars)
            for i, c in enumerate(rref_coords):
                v = T[i][j]
                if v and c:
                    acc = acc + c.scale(v)
            out.append(acc)
        return out

    def same_span(self, other: "SubBundle") -> bool:
        if self.rank != other.rank:
            return False
        return all(self.contains(s) for s in other.sections())

    def includes(self, other: "SubBundle") -> bool:
        return all(self.contains(s) for s in other.sections())

    def __repr__(self) -> str:
        return f"SubBundle({self.ambient.name}, rank {self.rank})"


def _solve_change(B: sympy.Matrix, Rm: sympy.Matrix) -> list[list[Fraction]]:
    # find T with T * B = Rm (B has independent rows)
    T = Rm * B.T * (B * B.T).inv()
    return _from_sympy(T)


def annihilator(U: SubBundle) -> SubBundle:
    """Constant basis of the sections of the dual that kill U."""
    n = U.ambient.rank
    return SubBundle(U.ambient.dual(), rational_nullspace([list(b) for b in U.basis], n))


def complement_basis(U: SubBundle) -> list[tuple[Fraction, ...]]:
    """Standard frame vectors completing U's basis to a basis of the ambient."""
    rows = [list(b) for b in U.basis]
    out = []
    n = U.ambient.rank
    for i in range(n):
        e = [Fraction(int(i == j)) for j in range(n)]
        if rational_rank(rows + [e]) > len(rows):
            rows.append(e)
            out.append(tuple(e))
    return out
