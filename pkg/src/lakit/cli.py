"""Command-line front end.

Instances are written in a line-oriented format::

    instance example
    base x1 x2
    bundle Q 2
    anchor rho : Q
    rho[1 -> 1] = 1
    bracket br : Q anchor=rho
    br[1,2 -> 1] = 3/2*x1^2
    tensor omega : Q,Q,Q -> B* alt(1,2) alt(2,3) alt(1,3)

Indices are 1-based.  For tensors with a symmetry tag a missing partner
entry is filled in; a partner that disagrees is an error at that line.
"""
from __future__ import annotations

import argparse
import ast
import json
import os
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .basering import DimensionError, Derivation, Poly
from .calculus import AnchoredBundle, Connection, DullBracket
from .constructions import (PreconditionError, core_degenerate_courant, la_courant_from_matched_2reps,
                            manin_pair, standard_dorfman, standard_la_courant_over_lie_algebroid,
                            tangent_prolongation_la_courant)
from .dirac import DoubleSubbundleData, check_la_dirac, check_maximal_isotropic
from .graded2 import (DEFAULT_TRUNCATION, TruncationError, check_homological, check_poisson_axioms,
                      check_Q_poisson_compat, homological_from_lie2, poisson_from_selfdual)
from .linalg import (FreeModule, Metric, SubBundle, SymmetryError, TensorMap,
                     annihilator, trivial_line, witness_for)
from .report import CheckEntry, CheckReport, Checker
from .structures import (CourantData, LACourantSplit, MatchedPair2Reps, SelfDual2Rep, SplitLie2,
                         check_courant, check_la_courant, check_matched_M, check_matched_m,
                         check_selfdual_2rep, check_split_lie2, cotangent)

SUITES = ("courant", "lie2", "selfdual", "matched", "la-courant", "poisson-lie2", "dirac", "manin")
CONSTRUCTS = ("core-courant", "manin", "tangent", "standard", "from-matched")
EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class SpecError(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(message)
        self.line, self.col, self.message = line, col, message

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


# -- polynomial expressions ---------------------------------------------------

def parse_poly(text: str, coords: list[str], line: int = 1, col: int = 1) -> Poly:
    """Polynomial with rational coefficients in the named coordinates.
    ``^`` is accepted for powers; division only by nonzero constants."""
    p = len(coords)
    src = text.replace("^", "**")

    def at(node) -> int:
        off = getattr(node, "col_offset", 0)
        # map back over the widened '^'
        shift, k = 0, 0
        for ch in text:
            if k >= off - shift:
                break
            if ch == "^":
                shift += 1
            k += 1
        return col + off - shift

    try:
        tree = ast.parse(src.strip(), mode="eval")
    except SyntaxError as exc:
        raise SpecError(line, col + max((exc.offset or 1) - 1, 0), f"bad expression: {exc.msg}") from None

    def ev(node) -> Poly:
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Poly.const(node.value, p)
        if isinstance(node, ast.Name):
            if node.id not in coords:
                raise SpecError(line, at(node), f"unknown coordinate {node.id!r}")
            return Poly.var(coords.index(node.id), p)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a = ev(node.left)
            if isinstance(node.op, ast.Pow):
                e = ev(node.right)
                if not e.is_constant() or e.constant_term().denominator != 1 or e.constant_term() < 0:
                    raise SpecError(line, at(node.right), "exponent must be a nonnegative integer")
                return a ** int(e.constant_term())
            b = ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                if not b.is_constant() or not b:
                    raise SpecError(line, at(node.right), "division only by nonzero constants")
                return a.scale(1 / b.constant_term())
        raise SpecError(line, at(node), f"unsupported expression {ast.dump(node)[:40]}")

    return ev(tree.body)


# -- documents ----------------------------------------------------------------

@dataclass
class TensorDecl:
    name: str
    kind: str
    inputs: list[str]
    output: str
    symmetry: list[tuple]
    line: int
    extra: dict = field(default_factory=dict)
    entries: dict = field(default_factory=dict)


@dataclass
class StructDecl:
    kind: str
    name: str
    args: dict
    line: int
    col: int


@dataclass
class SpecDocument:
    instance: str | None = None
    coords: list[str] = field(default_factory=list)
    bundles: dict = field(default_factory=dict)
    tensors: dict = field(default_factory=dict)
    subbundles: dict = field(default_factory=dict)
    structures: list = field(default_factory=list)
    objects: dict = field(default_factory=dict)

    @property
    def num_vars(self) -> int:
        return len(self.coords)

    def of_kind(self, kind: str) -> list[tuple[str, object]]:
        return [(s.name, self.objects[s.name]) for s in self.structures if s.kind == kind]


STRUCT_ARGS = {
    "courant": ({"anchor", "metric", "bracket"}, {"D"}),
    "algebroid": ({"anchor", "bracket"}, {"connection"}),
    "lie2": ({"anchor", "dB", "bracket", "nabla", "omega"}, set()),
    "selfdual": ({"anchor", "bracket", "dQ", "nabla", "R"}, {"nablastar"}),
    "lacourant": ({"lie2", "rep"}, set()),
    "matched": ({"anchorA", "bracketA", "anchorB", "bracketB", "dA", "dB", "A_on_B", "A_on_C", "RA",
                 "B_on_A", "B_on_C", "RB"}, set()),
    "dirac": ({"split", "U"}, {"Bp", "K", "Lambda"}),
}

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_MOD = r"(?:T\*M|TM|R|[A-Za-z_][A-Za-z0-9_]*\*?)"
_TAG = re.compile(r"(alt|sym)\((\d+),\s*(\d+)\)")
_ENTRY = re.compile(rf"^({_NAME})\[([^\]]*)\]\s*=\s*(.*)$")


def _module(doc: SpecDocument, ref: str, line: int, col: int) -> FreeModule:
    p = doc.num_vars
    if ref == "TM":
        return FreeModule("TM", p, p)
    if ref == "T*M":
        return cotangent(p)
    if ref == "R":
        return trivial_line(p)
    star = ref.endswith("*")
    base = ref[:-1] if star else ref
    if base not in doc.bundles:
        raise SpecError(line, col, f"unknown bundle {base!r}")
    m = FreeModule(base, doc.bundles[base], p)
    return m.dual() if star else m


def parse_spec(text: str) -> SpecDocument:
    """Parse and build every declared object; errors carry line and column."""
    doc = SpecDocument()
    seen_decl = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        word = body.split()[0]
        col = indent + 1
        m = _ENTRY.match(body)
        if m:
            _parse_entry(doc, m, lineno, col)
            continue
        if word == "instance":
            parts = body.split()
            if len(parts) != 2:
                raise SpecError(lineno, col, "expected: instance NAME")
            doc.instance = parts[1]
        elif word == "base":
            if seen_decl:
                raise SpecError(lineno, col, "base must come before bundles and tensors")
            names = body.split()[1:]
            for n in names:
                if not re.fullmatch(_NAME, n):
                    raise SpecError(lineno, col + body.index(n), f"bad coordinate name {n!r}")
            if len(set(names)) != len(names):
                raise SpecError(lineno, col, "repeated coordinate name")
            doc.coords = names
        elif word == "bundle":
            seen_decl = True
            parts = body.split()
            if len(parts) != 3 or not re.fullmatch(_NAME, parts[1]) or not parts[2].isdigit():
                raise SpecError(lineno, col, "expected: bundle NAME RANK")
            if parts[1] in ("TM", "R") or parts[1] in doc.bundles:
                raise SpecError(lineno, col + body.index(parts[1]), f"bundle {parts[1]!r} already defined")
            doc.bundles[parts[1]] = int(parts[2])
        elif word in ("tensor", "anchor", "bracket", "connection", "metric"):
            seen_decl = True
            _parse_tensor_decl(doc, word, body, lineno, col)
        elif word == "subbundle":
            seen_decl = True
            _parse_subbundle(doc, body, lineno, col)
        elif word in STRUCT_ARGS:
            _parse_struct(doc, word, body, lineno, col)
        else:
            raise SpecError(lineno, col, f"unknown statement {word!r}")
    _build(doc)
    return doc


def _declared(doc: SpecDocument, name: str, line: int, col: int) -> None:
    if name in doc.tensors or name in doc.subbundles or any(s.name == name for s in doc.structures):
        raise SpecError(line, col, f"name {name!r} already defined")


def _parse_tensor_decl(doc: SpecDocument, kind: str, body: str, line: int, col: int) -> None:
    m = re.fullmatch(rf"{kind}\s+({_NAME})\s*:\s*(.*)", body)
    if not m:
        raise SpecError(line, col, f"expected: {kind} NAME : ...")
    name, rest = m.group(1), m.group(2)
    _declared(doc, name, line, col + body.index(name))
    rcol = col + m.start(2)
    extra: dict = {}
    sym: list[tuple] = []
    if kind == "tensor":
        tags = list(_TAG.finditer(rest))
        head = _TAG.sub("", rest).strip()
        if "->" not in head:
            raise SpecError(line, rcol, "expected: IN1, IN2 -> OUT")
        lhs, out = (s.strip() for s in head.split("->", 1))
        inputs = [s.strip() for s in lhs.split(",")] if lhs else []
        for t in tags:
            a, b = int(t.group(2)) - 1, int(t.group(3)) - 1
            if not (0 <= a < len(inputs) and 0 <= b < len(inputs)) or a == b:
                raise SpecError(line, rcol + t.start(), f"tag {t.group(0)} does not name two input slots")
            sym.append((t.group(1), a, b))
    elif kind == "anchor":
        inputs, out = [rest.strip()], "TM"
    elif kind == "metric":
        inputs, out = [rest.strip(), rest.strip()], "R"
        sym = [("sym", 0, 1)]
    elif kind == "bracket":
        mm = re.fullmatch(rf"({_MOD})\s+anchor=({_NAME})", rest.strip())
        if not mm:
            raise SpecError(line, rcol, "expected: bracket NAME : MODULE anchor=ANCHOR")
        inputs, out = [mm.group(1)] * 2, mm.group(1)
        sym = [("alt", 0, 1)]
        extra["anchor"] = mm.group(2)
    else:
        mm = re.fullmatch(rf"({_NAME})\s+on\s+({_MOD})", rest.strip())
        if not mm:
            raise SpecError(line, rcol, "expected: connection NAME : ANCHOR on MODULE")
        anchor = doc.tensors.get(mm.group(1))
        if anchor is None or anchor.kind != "anchor":
            raise SpecError(line, rcol, f"unknown anchor {mm.group(1)!r}")
        inputs, out = [anchor.inputs[0], mm.group(2)], mm.group(2)
        extra["anchor"] = mm.group(1)
    for ref in inputs + [out]:
        if not re.fullmatch(_MOD, ref):
            raise SpecError(line, rcol, f"bad module reference {ref!r}")
        _module(doc, ref, line, rcol + max(rest.find(ref), 0))
    doc.tensors[name] = TensorDecl(name, kind, inputs, out, sym, line, extra)


def _parse_entry(doc: SpecDocument, m: re.Match, line: int, col: int) -> None:
    name, idx, expr = m.group(1), m.group(2), m.group(3)
    decl = doc.tensors.get(name)
    if decl is None:
        raise SpecError(line, col, f"unknown tensor {name!r}")
    icol = col + m.start(2)
    if decl.kind == "metric":
        parts, outs = idx.split(","), []
    else:
        if "->" not in idx:
            raise SpecError(line, icol, "expected indices 'i,j -> k'")
        left, right = idx.split("->", 1)
        parts = left.split(",") if left.strip() else []
        outs = [right]
    try:
        ins = [int(s) - 1 for s in parts]
        out = [int(s) - 1 for s in outs]
    except ValueError:
        raise SpecError(line, icol, "indices must be integers") from None
    if len(ins) != len(decl.inputs):
        raise SpecError(line, icol, f"{name} takes {len(decl.inputs)} input indices, got {len(ins)}")
    mods = [_module(doc, r, line, icol) for r in decl.inputs]
    if decl.kind != "metric":
        mods.append(_module(doc, decl.output, line, icol))
    for k, (i, mod) in enumerate(zip(ins + out, mods)):
        if not 0 <= i < mod.rank:
            raise SpecError(line, icol, f"index {i + 1} out of range for {mod.name} (rank {mod.rank})")
    key = tuple(ins + (out if decl.kind != "metric" else [0]))
    if key in decl.entries:
        raise SpecError(line, col, f"entry {name}[{idx}] given twice")
    value = parse_poly(expr, doc.coords, line, col + m.start(3))
    decl.entries[key] = (value, line, col)


def _parse_subbundle(doc: SpecDocument, body: str, line: int, col: int) -> None:
    m = re.fullmatch(rf"subbundle\s+({_NAME})\s*:\s*({_MOD})\s*=\s*(.*)", body)
    if not m:
        raise SpecError(line, col, "expected: subbundle NAME : MODULE = [..], [..]")
    name, ref, rest = m.group(1), m.group(2), m.group(3)
    _declared(doc, name, line, col + m.start(1))
    amb = _module(doc, ref, line, col + m.start(2))
    vecs = []
    for v in re.finditer(r"\[([^\]]*)\]", rest):
        try:
            row = [Fraction(s.strip()) for s in v.group(1).split(",")] if v.group(1).strip() else []
        except ValueError:
            raise SpecError(line, col + m.start(3) + v.start(), "basis entries must be rationals") from None
        if len(row) != amb.rank:
            raise SpecError(line, col + m.start(3) + v.start(),
                            f"basis vector of length {len(row)} in {ref} of rank {amb.rank}")
        vecs.append(row)
    try:
        doc.subbundles[name] = SubBundle(amb, vecs)
    except ValueError as exc:
        raise SpecError(line, col, str(exc)) from None


def _parse_struct(doc: SpecDocument, kind: str, body: str, line: int, col: int) -> None:
    parts = body.split()
    if len(parts) < 2 or not re.fullmatch(_NAME, parts[1]):
        raise SpecError(line, col, f"expected: {kind} NAME key=value ...")
    name = parts[1]
    _declared(doc, name, line, col + body.index(name))
    args = {}
    required, optional = STRUCT_ARGS[kind]
    for tok in re.finditer(r"(\S+)", body[body.index(name) + len(name):]):
        t = tok.group(1)
        tcol = col + body.index(name) + len(name) + tok.start()
        if "=" not in t:
            raise SpecError(line, tcol, f"expected key=value, got {t!r}")
        k, v = t.split("=", 1)
        if k not in required | optional:
            raise SpecError(line, tcol, f"unknown field {k!r} for {kind}")
        args[k] = (v, tcol)
    missing = sorted(required - set(args))
    if missing:
        raise SpecError(line, col, f"{kind} {name} is missing {', '.join(missing)}")
    doc.structures.append(StructDecl(kind, name, args, line, col))


def _build(doc: SpecDocument) -> None:
    for decl in doc.tensors.values():
        _fill_symmetry(decl)
        try:
            _build_tensor(doc, decl)
        except SpecError:
            raise
        except (DimensionError, SymmetryError, ValueError) as exc:
            raise SpecError(decl.line, 1, f"{decl.kind} {decl.name}: {exc}") from None
    for sub, val in doc.subbundles.items():
        doc.objects[sub] = val
    for s in doc.structures:
        try:
            doc.objects[s.name] = _build_struct(doc, s)
        except (DimensionError, SymmetryError, ValueError, TypeError) as exc:
            raise SpecError(s.line, s.col, f"{s.kind} {s.name}: {exc}") from None


def _build_tensor(doc: SpecDocument, decl: TensorDecl) -> None:
    p = doc.num_vars
    mods = [_module(doc, r, decl.line, 1) for r in decl.inputs]
    if decl.kind == "anchor":
        comps = [[Poly.zero(p) for _ in range(p)] for _ in range(mods[0].rank)]
        for (i, a), (v, _, _) in decl.entries.items():
            comps[i][a] = v
        doc.objects[decl.name] = AnchoredBundle(mods[0], [Derivation(c) for c in comps])
    elif decl.kind == "metric":
        n = mods[0].rank
        gram = [[Fraction(0)] * n for _ in range(n)]
        for (i, j, _), (v, ln, c) in decl.entries.items():
            if not v.is_constant():
                raise SpecError(ln, c, "metric entries must be constants")
            gram[i][j] = v.constant_term()
        doc.objects[decl.name] = Metric(mods[0], gram)
    elif decl.kind in ("bracket", "connection"):
        anchor = doc.objects.get(decl.extra["anchor"])
        if not isinstance(anchor, AnchoredBundle):
            raise SpecError(decl.line, 1, f"unknown anchor {decl.extra['anchor']!r}")
        on = _module(doc, decl.output, decl.line, 1)
        if anchor.module.rank != mods[0].rank:
            raise SpecError(decl.line, 1, f"anchor {decl.extra['anchor']!r} lives on a bundle of another rank")
        table: dict = {}
        for (i, j, k), (v, _, _) in decl.entries.items():
            table.setdefault((i, j), [Poly.zero(p)] * on.rank)
            table[(i, j)] = table[(i, j)][:k] + [v] + table[(i, j)][k + 1:]
        if decl.kind == "bracket":
            doc.objects[decl.name] = DullBracket(anchor, table)
        else:
            doc.objects[decl.name] = Connection(anchor, on, table)
    else:
        out = _module(doc, decl.output, decl.line, 1)
        coeffs = {k: v for k, (v, _, _) in decl.entries.items()}
        doc.objects[decl.name] = TensorMap(mods, out, coeffs, decl.symmetry)


def _fill_symmetry(decl: TensorDecl) -> None:
    for kind, a, b in decl.symmetry:
        sign = 1 if kind == "sym" else -1
        for key in sorted(decl.entries, key=lambda k: decl.entries[k][1]):
            v, ln, c = decl.entries[key]
            sw = list(key)
            sw[a], sw[b] = sw[b], sw[a]
            sw = tuple(sw)
            if sw == key:
                if kind == "alt" and v:
                    raise SpecError(ln, c, f"{decl.name}: alt({a + 1},{b + 1}) forces a zero diagonal entry")
                continue
            if sw in decl.entries:
                w, ln2, c2 = decl.entries[sw]
                if w != v.scale(sign):
                    later = max((ln, c), (ln2, c2))
                    raise SpecError(later[0], later[1],
                                    f"{decl.name}: {kind}({a + 1},{b + 1}) violated between "
                                    f"[{','.join(str(i + 1) for i in key)}] and [{','.join(str(i + 1) for i in sw)}]")
            else:
                decl.entries[sw] = (v.scale(sign), ln, c)


def _get(doc: SpecDocument, s: StructDecl, key: str, types):
    name, col = s.args[key]
    obj = doc.objects.get(name)
    if obj is None:
        raise SpecError(s.line, col, f"unresolved name {name!r}")
    if not isinstance(obj, types):
        raise SpecError(s.line, col, f"{name!r} has the wrong kind for {key}")
    return obj


def _build_struct(doc: SpecDocument, s: StructDecl):
    g = lambda k, t: _get(doc, s, k, t)  # noqa: E731
    if s.kind == "courant":
        E = g("anchor", AnchoredBundle)
        br = g("bracket", TensorMap)
        table = {(i, j): br(a, b) for i, a in enumerate(E.module.frames()) for j, b in enumerate(E.module.frames())}
        D = g("D", TensorMap) if "D" in s.args else None
        return CourantData(E, g("metric", Metric), table, Dmap=D)
    if s.kind == "algebroid":
        conn = g("connection", Connection) if "connection" in s.args else None
        return (g("anchor", AnchoredBundle), g("bracket", DullBracket), conn)
    if s.kind == "lie2":
        dB = g("dB", TensorMap)
        return SplitLie2(g("anchor", AnchoredBundle), dB.output, dB, g("bracket", DullBracket),
                         g("nabla", Connection), g("omega", TensorMap))
    if s.kind == "selfdual":
        dQ = g("dQ", TensorMap)
        nab = g("nabla", Connection)
        nabs = g("nablastar", Connection) if "nablastar" in s.args else nab.dual()
        return SelfDual2Rep(g("anchor", AnchoredBundle), g("bracket", DullBracket), dQ.output, dQ, nab, nabs,
                            g("R", TensorMap))
    if s.kind == "lacourant":
        return LACourantSplit(g("lie2", SplitLie2), g("rep", SelfDual2Rep))
    if s.kind == "matched":
        dA = g("dA", TensorMap)
        return MatchedPair2Reps(
            g("anchorA", AnchoredBundle), g("bracketA", DullBracket), g("anchorB", AnchoredBundle),
            g("bracketB", DullBracket), dA.inputs[0], dA, g("dB", TensorMap),
            g("A_on_B", Connection), g("A_on_C", Connection), g("RA", TensorMap),
            g("B_on_A", Connection), g("B_on_C", Connection), g("RB", TensorMap))
    if s.kind == "dirac":
        S = g("split", LACourantSplit)
        U = g("U", SubBundle)
        Bp = g("Bp", SubBundle) if "Bp" in s.args else SubBundle.full(S.B)
        K = g("K", SubBundle) if "K" in s.args else annihilator(U)
        Lam = g("Lambda", TensorMap) if "Lambda" in s.args else None
        return (S, DoubleSubbundleData(U, Bp, K, Lam))
    raise SpecError(s.line, s.col, f"unknown structure kind {s.kind}")


# -- emission -----------------------------------------------------------------

class Writer:
    """Builds a document; every emitted object re-parses to an equal one."""

    def __init__(self, num_vars: int, instance: str, coords: list[str] | None = None):
        self.coords = coords or [f"x{i + 1}" for i in range(num_vars)]
        self.lines = [f"instance {instance}", "base " + " ".join(self.coords) if self.coords else "base"]
        self.names: set[str] = set()

    def _fmt(self, v: Poly) -> str:
        return v.format(self.coords)

    def bundle(self, name: str, rank: int) -> str:
        self.lines.append(f"bundle {name} {rank}")
        return name

    def anchor(self, name: str, mod: str, A: AnchoredBundle) -> str:
        self.lines.append(f"anchor {name} : {mod}")
        for i, X in enumerate(A.anchor):
            for a, c in enumerate(X.components):
                if c:
                    self.lines.append(f"{name}[{i + 1} -> {a + 1}] = {self._fmt(c)}")
        return name

    def _table(self, name: str, table: dict, skip_lower: bool = False) -> None:
        for (i, j), s in sorted(table.items()):
            if skip_lower and j < i:
                continue
            for k, c in enumerate(s):
                if c:
                    self.lines.append(f"{name}[{i + 1},{j + 1} -> {k + 1}] = {self._fmt(c)}")

    def bracket(self, name: str, mod: str, anchor: str, br: DullBracket) -> str:
        self.lines.append(f"bracket {name} : {mod} anchor={anchor}")
        self._table(name, br.table, skip_lower=True)
        return name

    def connection(self, name: str, anchor: str, on: str, conn: Connection) -> str:
        self.lines.append(f"connection {name} : {anchor} on {on}")
        self._table(name, conn.table)
        return name

    def tensor(self, name: str, inputs: list[str], out: str, T: TensorMap) -> str:
        tags = " ".join(f"{k}({a + 1},{b + 1})" for k, a, b in T.symmetry)
        self.lines.append(f"tensor {name} : {', '.join(inputs)} -> {out}" + (f" {tags}" if tags else ""))
        for key, c in sorted(T.coeffs.items()):
            idx = ",".join(str(i + 1) for i in key[:-1])
            self.lines.append(f"{name}[{idx} -> {key[-1] + 1}] = {self._fmt(c)}")
        return name

    def metric(self, name: str, mod: str, g: Metric) -> str:
        self.lines.append(f"metric {name} : {mod}")
        for i, row in enumerate(g.gram):
            for j, v in enumerate(row):
                if v and i <= j:
                    self.lines.append(f"{name}[{i + 1},{j + 1}] = {v}")
        return name

    def subbundle(self, name: str, mod: str, U: SubBundle) -> str:
        vecs = ", ".join("[" + ", ".join(str(v) for v in b) + "]" for b in U.basis)
        self.lines.append(f"subbundle {name} : {mod} = {vecs}")
        return name

    def struct(self, kind: str, name: str, **args: str) -> None:
        self.lines.append(f"{kind} {name} " + " ".join(f"{k}={v}" for k, v in args.items()))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def emit_courant(w: Writer, name: str, C: CourantData, bundle: str = "E") -> None:
    w.bundle(bundle, C.module.rank)
    w.anchor(f"{name}_rho", bundle, C.E)
    w.metric(f"{name}_g", bundle, C.pairing)
    M = C.module
    br = TensorMap.from_function((M, M), M, C.bracket)
    w.tensor(f"{name}_br", [bundle, bundle], bundle, br)
    args = dict(anchor=f"{name}_rho", metric=f"{name}_g", bracket=f"{name}_br")
    if not C.pairing.nondegenerate:
        w.tensor(f"{name}_D", ["T*M"], bundle, C.Dmap)
        args["D"] = f"{name}_D"
    w.struct("courant", name, **args)


def emit_la_courant(w: Writer, name: str, S: LACourantSplit, Q: str = "Q", B: str = "B") -> None:
    L, P = S.lie2, S.rep
    w.bundle(Q, S.Q.rank)
    w.bundle(B, S.B.rank)
    w.anchor("rho_Q", Q, L.Q)
    w.tensor("dB", [f"{Q}*"], B, L.dB)
    w.bracket("br_Q", Q, "rho_Q", L.dull)
    w.connection("nabla_QB", "rho_Q", B, L.nabla)
    w.tensor("omega", [Q, Q, Q], f"{B}*", L.omega)
    w.anchor("rho_B", B, P.B)
    w.bracket("br_B", B, "rho_B", P.bracket)
    w.tensor("dQ", [f"{Q}*"], Q, P.dQ)
    w.connection("nabla_BQ", "rho_B", Q, P.nablaQ)
    w.connection("nabla_BQs", "rho_B", f"{Q}*", P.nablaQstar)
    w.tensor("R", [B, B, Q], f"{Q}*", P.R)
    w.struct("lie2", f"{name}_lie2", anchor="rho_Q", dB="dB", bracket="br_Q", nabla="nabla_QB", omega="omega")
    w.struct("selfdual", f"{name}_rep", anchor="rho_B", bracket="br_B", dQ="dQ", nabla="nabla_BQ",
             nablastar="nabla_BQs", R="R")
    w.struct("lacourant", name, lie2=f"{name}_lie2", rep=f"{name}_rep")


def emit_matched(w: Writer, name: str, mp: MatchedPair2Reps) -> None:
    w.bundle("A", mp.A.rank)
    w.bundle("B", mp.B.rank)
    w.bundle("C", mp.C.rank)
    w.anchor("rho_A", "A", mp.A)
    w.bracket("br_A", "A", "rho_A", mp.bracketA)
    w.anchor("rho_B", "B", mp.B)
    w.bracket("br_B", "B", "rho_B", mp.bracketB)
    w.tensor("dA", ["C"], "A", mp.dA)
    w.tensor("dB", ["C"], "B", mp.dB)
    w.connection("A_on_B", "rho_A", "B", mp.A_on_B)
    w.connection("A_on_C", "rho_A", "C", mp.A_on_C)
    w.tensor("RA", ["A", "A", "B"], "C", mp.RA)
    w.connection("B_on_A", "rho_B", "A", mp.B_on_A)
    w.connection("B_on_C", "rho_B", "C", mp.B_on_C)
    w.tensor("RB", ["B", "B", "A"], "C", mp.RB)
    w.struct("matched", name, anchorA="rho_A", bracketA="br_A", anchorB="rho_B", bracketB="br_B",
             dA="dA", dB="dB", A_on_B="A_on_B", A_on_C="A_on_C", RA="RA",
             B_on_A="B_on_A", B_on_C="B_on_C", RB="RB")


# -- suites -------------------------------------------------------------------

def _prefixed(report: CheckReport, prefix: str) -> CheckReport:
    return CheckReport().extend(report, prefix=prefix)


def _suite_reports(doc: SpecDocument, suite: str, checker: Checker, truncation: int) -> list[CheckReport] | None:
    out = []
    if suite == "courant":
        for n, C in doc.of_kind("courant"):
            out.append(_prefixed(check_courant(C, checker=checker), f"{n}:"))
    elif suite == "lie2":
        for n, L in doc.of_kind("lie2"):
            out.append(_prefixed(check_split_lie2(L, checker), f"{n}:"))
    elif suite == "selfdual":
        for n, P in doc.of_kind("selfdual"):
            out.append(_prefixed(check_selfdual_2rep(P, checker), f"{n}:"))
    elif suite == "matched":
        for n, mp in doc.of_kind("matched"):
            out.append(_prefixed(check_matched_m(mp, checker), f"{n}:"))
        for n, S in doc.of_kind("lacourant"):
            out.append(_prefixed(check_matched_M(S, checker), f"{n}:"))
    elif suite == "la-courant":
        for n, S in doc.of_kind("lacourant"):
            out.append(_prefixed(check_la_courant(S, checker), f"{n}:"))
    elif suite == "poisson-lie2":
        for n, S in doc.of_kind("lacourant"):
            br = poisson_from_selfdual(S.rep, truncation)
            Qv = homological_from_lie2(S.lie2, truncation)
            rep = check_poisson_axioms(br, checker=checker)
            rep.extend(check_homological(Qv, checker))
            rep.extend(check_Q_poisson_compat(Qv, br))
            out.append(_prefixed(rep, f"{n}:"))
    elif suite == "dirac":
        for n, (S, D) in doc.of_kind("dirac"):
            rep = check_maximal_isotropic(D)
            if rep.ok:
                rep.extend(check_la_dirac(S, D, checker))
            out.append(_prefixed(rep, f"{n}:"))
    elif suite == "manin":
        for n, (S, D) in doc.of_kind("dirac"):
            try:
                _, rep = manin_pair(S, D, checker)
            except PreconditionError as exc:
                rep = CheckReport([CheckEntry("precondition", False, witness_for(Poly.one(S.num_vars), ()))])
                print(f"{n}: precondition failed: {exc}", file=sys.stderr)
            out.append(_prefixed(rep, f"{n}:"))
    return out or None


def run_suite(doc: SpecDocument, suite: str, checker: Checker,
              truncation: int = DEFAULT_TRUNCATION) -> CheckReport:
    if suite == "all":
        total = CheckReport()
        for s in SUITES:
            reps = _suite_reports(doc, s, checker, truncation)
            for r in reps or []:
                total.extend(r, prefix=f"{s}/")
        return total
    reps = _suite_reports(doc, suite, checker, truncation)
    if reps is None:
        raise SpecError(1, 1, f"the document declares nothing the {suite!r} suite applies to")
    total = CheckReport()
    for r in reps:
        total.extend(r)
    return total


def report_json(instance: str, suite: str, seed: int, report: CheckReport) -> dict:
    entries = []
    for e in report:
        w = None
        if e.witness is not None:
            w = {"poly": str(e.witness.poly), "point": [str(v) for v in (e.witness.point or ())],
                 "frames": list(e.witness.frames)}
        entries.append({"axiom": e.axiom, "status": e.status, "witness": w})
    return {"instance": instance, "suite": suite, "entries": entries,
            "verdict": "pass" if report.ok else "fail", "seed": seed}


def report_text(instance: str, suite: str, seed: int, report: CheckReport, wall: float) -> str:
    head = f"instance: {instance}  suite: {suite}  seed: {seed}"
    return f"{head}\n{report.format_text()}\nwall time: {wall:.2f}s\n"


# -- commands -----------------------------------------------------------------

def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("LAKIT_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise SpecError(1, 1, f"LAKIT_SEED must be an integer, got {env!r}") from None
    return 0


def _load(path: str) -> SpecDocument:
    text = Path(path).read_text(encoding="utf-8")
    return parse_spec(text)


def _pick(doc: SpecDocument, kind: str, name: str | None):
    items = doc.of_kind(kind)
    if name is not None:
        items = [(n, o) for n, o in items if n == name]
    if not items:
        raise SpecError(1, 1, f"no {kind} structure" + (f" named {name!r}" if name else "") + " in the document")
    return items[0]


def construct(doc: SpecDocument, kind: str, name: str | None, checker: Checker, instance: str) -> str:
    p = doc.num_vars
    w = Writer(p, instance, doc.coords)
    if kind == "core-courant":
        _, S = _pick(doc, "lacourant", name)
        emit_courant(w, "core", core_degenerate_courant(S, checker=checker), bundle="Qs")
    elif kind == "manin":
        _, (S, D) = _pick(doc, "dirac", name)
        mp, rep = manin_pair(S, D, checker)
        if not rep.ok:
            raise PreconditionError(f"the Manin pair checks failed: {rep.failed()}")
        emit_courant(w, "manin", mp.courant, bundle="Bb")
        img = SubBundle(mp.Bbb, [[c.constant_term() for c in mp.iota(u)] for u in mp.Um.frames()])
        w.subbundle("U", "Bb", img)
    elif kind == "tangent":
        n, E = _pick(doc, "courant", name)
        conns = [o for o in doc.objects.values() if isinstance(o, Connection)
                 and o.acting.module.name == "TM" and o.on.rank == E.module.rank]
        S = tangent_prolongation_la_courant(E, conns[0] if conns else None)
        emit_la_courant(w, "tangent", S)
    elif kind == "standard":
        _, (A, br, conn) = _pick(doc, "algebroid", name)
        dull = None
        if conn is not None:
            dull = standard_dorfman(A, conn)
        emit_la_courant(w, "standard", standard_la_courant_over_lie_algebroid(A, br, dull))
    elif kind == "from-matched":
        _, mp = _pick(doc, "matched", name)
        emit_la_courant(w, "from_matched", la_courant_from_matched_2reps(mp))
    return w.text()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lakit", description="Exact checks for LA-Courant data and friends.")
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run a check suite on an instance file")
    v.add_argument("file")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--report", choices=("text", "json"), default="text")
    v.add_argument("-o", "--output")
    c = sub.add_parser("construct", help="build a derived structure and write it as an instance file")
    c.add_argument("kind", choices=CONSTRUCTS)
    c.add_argument("file")
    c.add_argument("-o", "--output")
    c.add_argument("--name", help="which declared structure to use (default: the first)")
    for p in (v, c):
        p.add_argument("--seed", type=int)
        p.add_argument("--truncation-degree", type=int, default=DEFAULT_TRUNCATION)
    return ap


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    if args.truncation_degree < 2:
        print("error: --truncation-degree must be at least 2", file=sys.stderr)
        return EXIT_INPUT
    try:
        seed = _seed(args.seed)
        doc = _load(args.file)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SpecError as exc:
        print(f"{args.file}:{exc.line}:{exc.col}: error: {exc.message}", file=sys.stderr)
        return EXIT_INPUT
    checker = Checker(seed)
    instance = doc.instance or Path(args.file).stem
    if args.command == "verify":
        t0 = time.perf_counter()
        try:
            report = run_suite(doc, args.suite, checker, args.truncation_degree)
        except SpecError as exc:
            print(f"{args.file}: error: {exc.message}", file=sys.stderr)
            return EXIT_INPUT
        except TruncationError as exc:
            print(f"error: {exc}; raise --truncation-degree", file=sys.stderr)
            return EXIT_INPUT
        wall = time.perf_counter() - t0
        if args.report == "json":
            text = json.dumps(report_json(instance, args.suite, seed, report), indent=2) + "\n"
        else:
            text = report_text(instance, args.suite, seed, report, wall)
        _write(text, args.output)
        return EXIT_PASS if report.ok else EXIT_FAIL
    try:
        text = construct(doc, args.kind, args.name, checker, f"{instance}_{args.kind.replace('-', '_')}")
    except SpecError as exc:
        print(f"{args.file}: error: {exc.message}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _write(text, args.output)
    return EXIT_PASS
