"""Check reports and the frame-sampling identity checker shared by every
axiom check."""
from __future__ import annotations

import random
from itertools import product
from typing import Callable, Iterable, NamedTuple, Sequence

from .basering import Derivation, Poly
from .linalg import FreeModule, Witness, witness_for


class CheckEntry(NamedTuple):
    axiom: str
    passed: bool
    witness: Witness | None = None

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"


class CheckReport:
    """Ordered per-axiom verdicts.  Failing entries always carry a witness."""

    def __init__(self, entries: Iterable[CheckEntry] = ()):
        self.entries: list[CheckEntry] = []
        for e in entries:
            self.add(e)

    def add(self, entry: CheckEntry) -> CheckEntry:
        if not entry.passed and entry.witness is None:
            raise ValueError(f"failing entry {entry.axiom!r} without a witness")
        self.entries.append(entry)
        return entry

    def extend(self, other: "CheckReport", prefix: str = "") -> "CheckReport":
        for e in other.entries:
            self.add(CheckEntry(prefix + e.axiom, e.passed, e.witness))
        return self

    @property
    def ok(self) -> bool:
        return all(e.passed for e in self.entries)

    def __bool__(self) -> bool:
        return self.ok

    def __getitem__(self, axiom: str) -> CheckEntry:
        for e in self.entries:
            if e.axiom == axiom:
                return e
        raise KeyError(axiom)

    def __contains__(self, axiom: str) -> bool:
        return any(e.axiom == axiom for e in self.entries)

    def passed(self, axiom: str) -> bool:
        return self[axiom].passed

    def failed(self) -> list[str]:
        return [e.axiom for e in self.entries if not e.passed]

    def axioms(self) -> list[str]:
        return [e.axiom for e in self.entries]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        return f"CheckReport(ok={self.ok}, failed={self.failed()})"

    def format_text(self) -> str:
        lines = []
        for e in self.entries:
            line = f"{e.status.upper():4}  {e.axiom}"
            if e.witness is not None:
                w = e.witness
                pt = "(" + ", ".join(str(v) for v in w.point) + ")"
                line += f"  witness: {w.poly} at {pt}, frames {list(w.frames)}"
            lines.append(line)
        lines.append("verdict: " + ("pass" if self.ok else "fail"))
        return "\n".join(lines)


def flatten(value) -> list[Poly]:
    """Coefficient polynomials of a check residual in a fixed order."""
    if isinstance(value, Poly):
        return [value]
    if isinstance(value, Derivation):
        return list(value.components)
    flat = getattr(value, "flat", None)
    if flat is not None:
        return list(flat())
    out: list[Poly] = []
    for v in value:
        out.extend(flatten(v))
    return out


class Functions:
    """Marker for an argument slot ranging over sample functions."""

    def __init__(self, num_vars: int):
        self.num_vars = num_vars


class Checker:
    """Evaluates residuals of identities on frame tuples, and on frame tuples
    with one argument multiplied by a random polynomial.

    ``seed`` fixes the random multipliers so reports are reproducible.
    """

    def __init__(self, seed: int = 0, multiples: bool = True):
        self.seed = seed
        self.multiples = multiples
        self.rng = random.Random(seed)

    def random_poly(self, num_vars: int, degree: int = 2, terms: int = 3) -> Poly:
        if num_vars == 0:
            return Poly.const(self.rng.choice([2, 3, -1]), 0)
        while True:
            coeffs = {}
            for _ in range(terms):
                exp = [0] * num_vars
                for _ in range(self.rng.randint(1, degree)):
                    exp[self.rng.randrange(num_vars)] += 1
                coeffs[tuple(exp)] = self.rng.choice([-3, -2, -1, 1, 2, 3])
            coeffs[(0,) * num_vars] = self.rng.choice([-1, 1, 2])
            p = Poly(num_vars, coeffs)
            if not p.is_constant():
                return p

    def sample_functions(self, num_vars: int) -> list[Poly]:
        xs = [Poly.var(i, num_vars) for i in range(num_vars)]
        if not xs:
            return [Poly.one(0)]
        return xs + [self.random_poly(num_vars)]

    def identity(self, axiom: str, slots: Sequence, residual: Callable[..., object]) -> CheckEntry:
        """Check that ``residual`` vanishes for all frame arguments.

        ``slots`` lists a FreeModule (frame arguments) or a ``Functions``
        marker for each argument of ``residual``.
        """
        w = self.find_failure(slots, residual)
        return CheckEntry(axiom, w is None, w)

    def find_failure(self, slots: Sequence, residual: Callable[..., object]) -> Witness | None:
        choices = []
        for s in slots:
            if isinstance(s, FreeModule):
                choices.append([(i, f) for i, f in enumerate(s.frames())])
            elif isinstance(s, Functions):
                choices.append(list(enumerate(self.sample_functions(s.num_vars))))
            else:
                raise TypeError(f"unsupported slot {s!r}")
        combos = list(product(*choices))
        for combo in combos:
            w = self._evaluate(residual, combo, None, None)
            if w is not None:
                return w
        if not self.multiples:
            return None
        for pos, s in enumerate(slots):
            if not isinstance(s, FreeModule) or s.num_vars == 0:
                continue
            m = self.random_poly(s.num_vars)
            for combo in combos:
                w = self._evaluate(residual, combo, pos, m)
                if w is not None:
                    return w
        return None

    @staticmethod
    def _evaluate(residual, combo, pos, m) -> Witness | None:
        args = [a for _, a in combo]
        if pos is not None:
            args[pos] = args[pos] * m
        value = residual(*args)
        for k, c in enumerate(flatten(value)):
            if c:
                return witness_for(c, tuple(i for i, _ in combo) + (k,))
        return None


def zero_check(axiom: str, values: Iterable[tuple[tuple, object]]) -> CheckEntry:
    """Entry asserting that every labelled value vanishes."""
    for frames, value in values:
        for k, c in enumerate(flatten(value)):
            if c:
                return CheckEntry(axiom, False, witness_for(c, tuple(frames) + (k,)))
    return CheckEntry(axiom, True, None)
