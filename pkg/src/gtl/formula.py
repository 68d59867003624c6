"""pGTL formula abstract syntax, text grammar, and structural analyses.

Formulas are immutable trees.  Thresholds, neighbor counts and time bounds
are either literals or named parameters (written `?name` in the concrete
syntax); a parameter-free formula is a GTL formula and can be evaluated.

Grammar (whitespace-insensitive)::

    formula  := implic
    implic   := orexpr [ "->" implic ]
    orexpr   := andexpr { "|" andexpr }
    andexpr  := until { "&" until }
    until    := unary [ "U" [bound] until ]
    unary    := "!" unary | ("G"|"F") [bound] unary | exists
              | atom | "(" formula ")" | "TRUE" | "FALSE"
    bound    := "[>=" int "]" | "[<=" int "]" | "[>=" int "][<=" int "]"
    exists   := "E" intval { "via" "(" edgeatom ")" } ":" unary
    atom     := "x" ("<="|">=") numval     edgeatom := "y" ("<="|">=") numval
    intval   := integer | "?" name         numval   := number | "?" name
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .errors import InputError, ParseError, UsageError
from .graph import EdgeProposition, NodeProposition


@dataclass(frozen=True)
class Param:
    name: str

    def __str__(self):
        return f"?{self.name}"


Value = Union[int, float, Param]


def _fmt_value(v: Value) -> str:
    if isinstance(v, Param):
        return str(v)
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


@dataclass(frozen=True)
class EdgeAtom:
    """Edge proposition template: y <= t or y >= t, t literal or parameter."""

    op: str
    threshold: Value

    def prop(self) -> EdgeProposition:
        if isinstance(self.threshold, Param):
            raise UsageError(f"edge proposition still parameterized by {self.threshold}")
        return EdgeProposition(self.op, float(self.threshold))

    def __str__(self):
        return f"y {self.op} {_fmt_value(self.threshold)}"


@dataclass(frozen=True)
class Bound:
    """Time bound on a temporal operator: >= lo, <= hi, or both (paired)."""

    lo: Optional[Value] = None
    hi: Optional[Value] = None

    @property
    def paired(self):
        return self.lo is not None and self.hi is not None

    def __str__(self):
        parts = []
        if self.lo is not None:
            parts.append(f"[>={_fmt_value(self.lo)}]")
        if self.hi is not None:
            parts.append(f"[<={_fmt_value(self.hi)}]")
        return "".join(parts)


class Formula:
    """Base class; all nodes are frozen dataclasses and hashable."""

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)

    def __str__(self):
        return print_formula(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    op: str  # "<=" or ">="
    threshold: Value

    def prop(self) -> NodeProposition:
        if isinstance(self.threshold, Param):
            raise UsageError(f"atom still parameterized by {self.threshold}")
        return NodeProposition(self.op, float(self.threshold))


@dataclass(frozen=True)
class Exists(Formula):
    count: Value
    chain: tuple  # tuple[EdgeAtom, ...]
    body: Formula

    def __post_init__(self):
        if not self.chain:
            raise InputError("neighbor chain must have length >= 1")


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula
    bound: Optional[Bound] = None


@dataclass(frozen=True)
class Eventually(Formula):
    sub: Formula
    bound: Optional[Bound] = None


@dataclass(frozen=True)
class Always(Formula):
    sub: Formula
    bound: Optional[Bound] = None


TRUE = TrueF()
FALSE = FalseF()


# ---------------------------------------------------------------------------
# printing

_LEVEL_IMPLIC, _LEVEL_OR, _LEVEL_AND, _LEVEL_UNTIL, _LEVEL_UNARY = range(5)


def print_formula(f: Formula) -> str:
    return _print(f, _LEVEL_IMPLIC)


def _print(f, ctx):
    if isinstance(f, TrueF):
        return "TRUE"
    if isinstance(f, FalseF):
        return "FALSE"
    if isinstance(f, Atom):
        return f"x {f.op} {_fmt_value(f.threshold)}"
    if isinstance(f, Implies):
        text = f"{_print(f.left, _LEVEL_OR)} -> {_print(f.right, _LEVEL_IMPLIC)}"
        return f"({text})" if ctx > _LEVEL_IMPLIC else text
    if isinstance(f, Or):
        text = f"{_print(f.left, _LEVEL_OR)} | {_print(f.right, _LEVEL_AND)}"
        return f"({text})" if ctx > _LEVEL_OR else text
    if isinstance(f, And):
        text = f"{_print(f.left, _LEVEL_AND)} & {_print(f.right, _LEVEL_UNTIL)}"
        return f"({text})" if ctx > _LEVEL_AND else text
    if isinstance(f, Until):
        b = str(f.bound) if f.bound else ""
        text = f"{_print(f.left, _LEVEL_UNARY)} U{b} {_print(f.right, _LEVEL_UNTIL)}"
        return f"({text})" if ctx > _LEVEL_UNTIL else text
    if isinstance(f, Not):
        return f"! {_print(f.sub, _LEVEL_UNARY)}"
    if isinstance(f, Eventually):
        b = str(f.bound) if f.bound else ""
        return f"F{b} {_print(f.sub, _LEVEL_UNARY)}"
    if isinstance(f, Always):
        b = str(f.bound) if f.bound else ""
        return f"G{b} {_print(f.sub, _LEVEL_UNARY)}"
    if isinstance(f, Exists):
        vias = " ".join(f"via ({e})" for e in f.chain)
        return f"E {_fmt_value(f.count)} {vias} : {_print(f.body, _LEVEL_UNARY)}"
    raise TypeError(f"not a formula node: {f!r}")


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>-?\d+(\.\d+)?([eE][+-]?\d+)?)
  | (?P<param>\?[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|->|[()\[\]|&!:])
  | (?P<word>[A-Za-z_][A-Za-z_0-9]*)
""",
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        val = m.group()
        if kind != "ws":
            tokens.append((kind, val, line, col))
        nl = val.count("\n")
        if nl:
            line += nl
            col = len(val) - val.rfind("\n")
        else:
            col += len(val)
        pos = m.end()
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, expected=()):
        kind, val, line, col = self.peek()
        shown = val if kind != "eof" else "end of input"
        raise ParseError(f"{msg}, got {shown!r}", line, col, expected)

    def expect(self, val):
        kind, v, line, col = self.peek()
        if v != val:
            self.error(f"expected {val!r}", expected=(val,))
        return self.next()

    def parse(self):
        f = self.implic()
        if self.peek()[0] != "eof":
            self.error("trailing input after formula")
        return f

    def implic(self):
        left = self.orexpr()
        if self.peek()[1] == "->":
            self.next()
            return Implies(left, self.implic())
        return left

    def orexpr(self):
        f = self.andexpr()
        while self.peek()[1] == "|":
            self.next()
            f = Or(f, self.andexpr())
        return f

    def andexpr(self):
        f = self.untilexpr()
        while self.peek()[1] == "&":
            self.next()
            f = And(f, self.untilexpr())
        return f

    def untilexpr(self):
        left = self.unary()
        if self.peek()[1] == "U":
            self.next()
            bound = self.maybe_bound()
            return Until(left, self.untilexpr(), bound)
        return left

    def maybe_bound(self):
        if self.peek()[1] != "[":
            return None
        lo = hi = None
        self.expect("[")
        op = self.peek()[1]
        if op not in ("<=", ">="):
            self.error("expected '>=' or '<=' inside bound", expected=(">=", "<="))
        self.next()
        val = self.intval()
        self.expect("]")
        if op == ">=":
            lo = val
        else:
            hi = val
        if self.peek()[1] == "[" and lo is not None:
            self.expect("[")
            if self.peek()[1] != "<=":
                self.error("expected '<=' in second bound", expected=("<=",))
            self.next()
            hi = self.intval()
            self.expect("]")
        return Bound(lo, hi)

    def intval(self):
        kind, val, line, col = self.peek()
        if kind == "param":
            self.next()
            return Param(val[1:])
        if kind == "num":
            self.next()
            if "." in val or "e" in val or "E" in val:
                raise ParseError("expected an integer", line, col)
            return int(val)
        self.error("expected integer or parameter", expected=("integer", "?name"))

    def numval(self):
        kind, val, _, _ = self.peek()
        if kind == "param":
            self.next()
            return Param(val[1:])
        if kind == "num":
            self.next()
            return float(val) if ("." in val or "e" in val or "E" in val) else int(val)
        self.error("expected number or parameter", expected=("number", "?name"))

    def unary(self):
        kind, val, _, _ = self.peek()
        if val == "!":
            self.next()
            return Not(self.unary())
        if val in ("G", "F"):
            self.next()
            bound = self.maybe_bound()
            sub = self.unary()
            return Always(sub, bound) if val == "G" else Eventually(sub, bound)
        if val == "E":
            self.next()
            count = self.intval()
            chain = []
            while self.peek()[1] == "via":
                self.next()
                self.expect("(")
                chain.append(self.edgeatom())
                self.expect(")")
            if not chain:
                self.error("'E' needs at least one 'via (...)' hop", expected=("via",))
            self.expect(":")
            return Exists(count, tuple(chain), self.unary())
        if val == "TRUE":
            self.next()
            return TRUE
        if val == "FALSE":
            self.next()
            return FALSE
        if val == "x":
            return self.atom()
        if val == "(":
            self.next()
            f = self.implic()
            self.expect(")")
            return f
        self.error("expected a formula", expected=("!", "G", "F", "E", "x", "(", "TRUE", "FALSE"))

    def atom(self):
        self.expect("x")
        op = self.peek()[1]
        if op not in ("<=", ">="):
            self.error("expected '<=' or '>=' after 'x'", expected=("<=", ">="))
        self.next()
        return Atom(op, self.numval())

    def edgeatom(self):
        self.expect("y")
        op = self.peek()[1]
        if op not in ("<=", ">="):
            self.error("expected '<=' or '>=' after 'y'", expected=("<=", ">="))
        self.next()
        return EdgeAtom(op, self.numval())


def parse(text: str) -> Formula:
    """Parse formula text; parse(print_formula(f)) is structurally equal to f."""
    f = _Parser(text).parse()
    free_parameters(f)  # validates parameter uniqueness
    return f


# ---------------------------------------------------------------------------
# parameters and instantiation

@dataclass(frozen=True)
class ParamInfo:
    name: str
    kind: str  # "continuous" | "integer"


def _walk_values(f):
    """Yield (value, kind) for every literal-or-parameter slot of f."""
    if isinstance(f, Atom):
        yield f.threshold, "continuous"
    elif isinstance(f, Exists):
        yield f.count, "integer"
        for e in f.chain:
            yield e.threshold, "continuous"
        yield from _walk_values(f.body)
    elif isinstance(f, Not):
        yield from _walk_values(f.sub)
    elif isinstance(f, (And, Or, Implies)):
        yield from _walk_values(f.left)
        yield from _walk_values(f.right)
    elif isinstance(f, Until):
        if f.bound:
            for v in (f.bound.lo, f.bound.hi):
                if v is not None:
                    yield v, "integer"
        yield from _walk_values(f.left)
        yield from _walk_values(f.right)
    elif isinstance(f, (Eventually, Always)):
        if f.bound:
            for v in (f.bound.lo, f.bound.hi):
                if v is not None:
                    yield v, "integer"
        yield from _walk_values(f.sub)


def free_parameters(f: Formula) -> dict[str, ParamInfo]:
    """Free parameters in slot order; raises if a name is reused."""
    out = {}
    for value, kind in _walk_values(f):
        if isinstance(value, Param):
            if value.name in out:
                raise InputError(f"parameter {value.name!r} used in more than one position")
            out[value.name] = ParamInfo(value.name, kind)
    return out


def _subst_value(value, kind, valuation):
    if not isinstance(value, Param):
        return value
    if value.name not in valuation:
        raise UsageError(f"missing value for parameter {value.name!r}")
    x = valuation[value.name]
    if kind == "integer":
        if abs(x - round(x)) > 1e-9:
            raise UsageError(f"parameter {value.name!r} needs an integral value, got {x}")
        return int(round(x))
    return float(x)


def instantiate(f: Formula, valuation: Mapping[str, float]) -> Formula:
    """Replace every parameter position with its value from the valuation."""
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Atom):
        return Atom(f.op, _subst_value(f.threshold, "continuous", valuation))
    if isinstance(f, Exists):
        chain = tuple(EdgeAtom(e.op, _subst_value(e.threshold, "continuous", valuation)) for e in f.chain)
        return Exists(_subst_value(f.count, "integer", valuation), chain, instantiate(f.body, valuation))
    if isinstance(f, Not):
        return Not(instantiate(f.sub, valuation))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(instantiate(f.left, valuation), instantiate(f.right, valuation))
    if isinstance(f, Until):
        return Until(instantiate(f.left, valuation), instantiate(f.right, valuation), _subst_bound(f.bound, valuation))
    if isinstance(f, Eventually):
        return Eventually(instantiate(f.sub, valuation), _subst_bound(f.bound, valuation))
    if isinstance(f, Always):
        return Always(instantiate(f.sub, valuation), _subst_bound(f.bound, valuation))
    raise TypeError(f"not a formula node: {f!r}")


def _subst_bound(bound, valuation):
    if bound is None:
        return None
    lo = _subst_value(bound.lo, "integer", valuation) if bound.lo is not None else None
    hi = _subst_value(bound.hi, "integer", valuation) if bound.hi is not None else None
    return Bound(lo, hi)


def is_ground(f: Formula) -> bool:
    return not free_parameters(f)


def rename_parameters(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename free parameters; names absent from the mapping are kept."""

    def ren(value):
        if isinstance(value, Param):
            return Param(mapping.get(value.name, value.name))
        return value

    def ren_bound(bound):
        if bound is None:
            return None
        return Bound(ren(bound.lo) if bound.lo is not None else None,
                     ren(bound.hi) if bound.hi is not None else None)

    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Atom):
        return Atom(f.op, ren(f.threshold))
    if isinstance(f, Exists):
        chain = tuple(EdgeAtom(e.op, ren(e.threshold)) for e in f.chain)
        return Exists(ren(f.count), chain, rename_parameters(f.body, mapping))
    if isinstance(f, Not):
        return Not(rename_parameters(f.sub, mapping))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(rename_parameters(f.left, mapping), rename_parameters(f.right, mapping))
    if isinstance(f, Until):
        return Until(rename_parameters(f.left, mapping), rename_parameters(f.right, mapping), ren_bound(f.bound))
    if isinstance(f, Eventually):
        return Eventually(rename_parameters(f.sub, mapping), ren_bound(f.bound))
    if isinstance(f, Always):
        return Always(rename_parameters(f.sub, mapping), ren_bound(f.bound))
    raise TypeError(f"not a formula node: {f!r}")


# ---------------------------------------------------------------------------
# desugaring

def desugar(f: Formula) -> Formula:
    """Rewrite Implies to !a | b and split paired time bounds into conjunctions.

    A zero lower bound is dropped (>=0 is vacuous).  The result uses only
    single-sided bounds and no Implies nodes; it is the semantic ground truth
    for paired-bound operators.
    """
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, Exists):
        return Exists(f.count, f.chain, desugar(f.body))
    if isinstance(f, Not):
        return Not(desugar(f.sub))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Or):
        return Or(desugar(f.left), desugar(f.right))
    if isinstance(f, Implies):
        return Or(Not(desugar(f.left)), desugar(f.right))
    if isinstance(f, (Eventually, Always)):
        sub = desugar(f.sub)
        ctor = type(f)
        bound = f.bound
        if bound is not None and bound.paired:
            # split before normalizing: a paired zero lower bound still
            # contributes its unbounded half (G[>=0] is G, not vacuous)
            return And(ctor(sub, _norm_bound(Bound(bound.lo, None))),
                       ctor(sub, Bound(None, bound.hi)))
        return ctor(sub, _norm_bound(bound))
    if isinstance(f, Until):
        left, right = desugar(f.left), desugar(f.right)
        bound = f.bound
        if bound is not None and bound.paired:
            return And(Until(left, right, _norm_bound(Bound(bound.lo, None))),
                       Until(left, right, Bound(None, bound.hi)))
        return Until(left, right, _norm_bound(bound))
    raise TypeError(f"not a formula node: {f!r}")


def _norm_bound(bound):
    if bound is None:
        return None
    lo = bound.lo
    if lo == 0:
        lo = None
    if lo is None and bound.hi is None:
        return None
    return Bound(lo, bound.hi)


def nnf(f: Formula) -> Formula:
    """Push negations inward; Not survives only on Atom, Exists, and Until."""
    f = desugar(f)
    return _nnf(f, False)


def _nnf(f, neg):
    if isinstance(f, TrueF):
        return FALSE if neg else TRUE
    if isinstance(f, FalseF):
        return TRUE if neg else FALSE
    if isinstance(f, Not):
        return _nnf(f.sub, not neg)
    if isinstance(f, And):
        l, r = _nnf(f.left, neg), _nnf(f.right, neg)
        return Or(l, r) if neg else And(l, r)
    if isinstance(f, Or):
        l, r = _nnf(f.left, neg), _nnf(f.right, neg)
        return And(l, r) if neg else Or(l, r)
    if isinstance(f, Eventually):
        sub = _nnf(f.sub, neg)
        return Always(sub, f.bound) if neg else Eventually(sub, f.bound)
    if isinstance(f, Always):
        sub = _nnf(f.sub, neg)
        return Eventually(sub, f.bound) if neg else Always(sub, f.bound)
    if isinstance(f, Until):
        g = Until(_nnf(f.left, False), _nnf(f.right, False), f.bound)
        return Not(g) if neg else g
    if isinstance(f, (Atom, Exists)):
        if isinstance(f, Exists):
            f = Exists(f.count, f.chain, _nnf(f.body, False))
        return Not(f) if neg else f
    raise TypeError(f"not a formula node: {f!r}")


# ---------------------------------------------------------------------------
# polarity

POL_U, POL_POS, POL_NEG, POL_MIX = "U", "+", "-", "M"

_NEG_TABLE = {POL_U: POL_U, POL_POS: POL_NEG, POL_NEG: POL_POS, POL_MIX: POL_MIX}

_COMP_TABLE = {
    (POL_U, POL_U): POL_U, (POL_U, POL_POS): POL_POS, (POL_U, POL_NEG): POL_NEG, (POL_U, POL_MIX): POL_MIX,
    (POL_POS, POL_U): POL_POS, (POL_POS, POL_POS): POL_POS, (POL_POS, POL_NEG): POL_MIX, (POL_POS, POL_MIX): POL_MIX,
    (POL_NEG, POL_U): POL_NEG, (POL_NEG, POL_POS): POL_MIX, (POL_NEG, POL_NEG): POL_NEG, (POL_NEG, POL_MIX): POL_MIX,
    (POL_MIX, POL_U): POL_MIX, (POL_MIX, POL_POS): POL_MIX, (POL_MIX, POL_NEG): POL_MIX, (POL_MIX, POL_MIX): POL_MIX,
}


def _pol_neg(a):
    return _NEG_TABLE[a]


def _pol_comp(a, b):
    return _COMP_TABLE[(a, b)]


def polarity(f: Formula, p: str) -> str:
    """Direction in which increasing parameter p eases satisfaction.

    Returns one of "U", "+", "-", "M".  Derived operators are desugared
    first; an Until with a bound parameterized by p reports "M" (the rule
    table does not cover it).
    """
    return _polarity(desugar(f), p)


def _is_p(value, p):
    return isinstance(value, Param) and value.name == p


def _polarity(f, p):
    if isinstance(f, (TrueF, FalseF)):
        return POL_U
    if isinstance(f, Atom):
        if _is_p(f.threshold, p):
            return POL_POS if f.op == "<=" else POL_NEG
        return POL_U
    if isinstance(f, Not):
        return _pol_neg(_polarity(f.sub, p))
    if isinstance(f, (And, Or)):
        a, b = _polarity(f.left, p), _polarity(f.right, p)
        if isinstance(f, Or):
            # a | b  ==  !(!a & !b)
            return _pol_neg(_pol_comp(_pol_neg(a), _pol_neg(b)))
        return _pol_comp(a, b)
    if isinstance(f, Until):
        if f.bound is not None and (_is_p(f.bound.lo, p) or _is_p(f.bound.hi, p)):
            return POL_MIX
        return _pol_comp(_polarity(f.left, p), _polarity(f.right, p))
    if isinstance(f, Eventually):
        acc = _polarity(f.sub, p)
        if f.bound is not None:
            if _is_p(f.bound.hi, p):
                acc = _pol_comp(POL_POS, acc)
            if _is_p(f.bound.lo, p):
                acc = _pol_comp(POL_NEG, acc)
        return acc
    if isinstance(f, Always):
        # G~i a == ! F~i !a
        inner = Eventually(Not(f.sub), f.bound)
        return _pol_neg(_polarity(inner, p))
    if isinstance(f, Exists):
        acc = _polarity(f.body, p)
        for e in f.chain:
            if _is_p(e.threshold, p):
                acc = _pol_comp(POL_POS if e.op == "<=" else POL_NEG, acc)
        if _is_p(f.count, p):
            acc = _pol_comp(POL_NEG, acc)
        return acc
    raise TypeError(f"not a formula node: {f!r}")


# ---------------------------------------------------------------------------
# size and subtype

def formula_size(f: Formula) -> int:
    """Number of Boolean connectives: And/Or nodes plus one per Implies.

    Paired time bounds contribute nothing (they are counted as written,
    not as their desugared conjunction).
    """
    if isinstance(f, (TrueF, FalseF, Atom)):
        return 0
    if isinstance(f, Exists):
        return formula_size(f.body)
    if isinstance(f, Not):
        return formula_size(f.sub)
    if isinstance(f, (And, Or, Implies)):
        return 1 + formula_size(f.left) + formula_size(f.right)
    if isinstance(f, Until):
        return formula_size(f.left) + formula_size(f.right)
    if isinstance(f, (Eventually, Always)):
        return formula_size(f.sub)
    raise TypeError(f"not a formula node: {f!r}")


@dataclass(frozen=True)
class Subtype:
    typeI: bool
    typeII: bool
    cosafe: bool
    safe: bool


def _contains_exists(f):
    if isinstance(f, Exists):
        return True
    if isinstance(f, Not):
        return _contains_exists(f.sub)
    if isinstance(f, (And, Or, Implies, Until)):
        return _contains_exists(f.left) or _contains_exists(f.right)
    if isinstance(f, (Eventually, Always)):
        return _contains_exists(f.sub)
    return False


def _exists_bodies_atomic(f):
    if isinstance(f, Exists):
        return isinstance(f.body, Atom)
    if isinstance(f, Not):
        return _exists_bodies_atomic(f.sub)
    if isinstance(f, (And, Or, Implies, Until)):
        return _exists_bodies_atomic(f.left) and _exists_bodies_atomic(f.right)
    if isinstance(f, (Eventually, Always)):
        return _exists_bodies_atomic(f.sub)
    return True


def _is_cosafe(f):
    if isinstance(f, (TrueF, FalseF)):
        return True
    if isinstance(f, Atom):
        return True
    if isinstance(f, Not):
        return isinstance(f.sub, Atom)
    if isinstance(f, (And, Or)):
        return _is_cosafe(f.left) and _is_cosafe(f.right)
    if isinstance(f, Eventually):
        return _is_cosafe(f.sub)  # F, F[>=i], F[<=i] all co-safe
    if isinstance(f, Always):
        if f.bound is None or f.bound.hi is None or f.bound.lo is not None:
            return False  # only G[<=i] is co-safe
        return _is_cosafe(f.sub)
    if isinstance(f, Until):
        return _is_cosafe(f.left) and _is_cosafe(f.right)
    if isinstance(f, Exists):
        return _is_cosafe(f.body)
    return False


def _is_safe(f):
    if isinstance(f, (TrueF, FalseF)):
        return True
    if isinstance(f, Atom):
        return True
    if isinstance(f, Not):
        return isinstance(f.sub, Atom)
    if isinstance(f, (And, Or)):
        return _is_safe(f.left) and _is_safe(f.right)
    if isinstance(f, Always):
        return _is_safe(f.sub)  # G, G[>=i], G[<=i] all safe
    if isinstance(f, Eventually):
        if f.bound is None or f.bound.hi is None or f.bound.lo is not None:
            return False  # only F[<=i] is safe
        return _is_safe(f.sub)
    if isinstance(f, Until):
        if f.bound is None or f.bound.hi is None or f.bound.lo is not None:
            return False  # only U[<=i] is safe
        return _is_safe(f.left) and _is_safe(f.right)
    if isinstance(f, Exists):
        return _is_safe(f.body)
    return False


def classify_subtype(f: Formula) -> Subtype:
    """Type-I/type-II and syntactically co-safe/safe flags.

    Grammars are checked on the negation normal form after desugaring.
    A bare atom counts as type-I; type-II requires a leading neighbor
    predicate wrapping a neighbor-free formula.
    """
    n = nnf(f)
    type1 = _exists_bodies_atomic(n)
    type2 = isinstance(n, Exists) and not _contains_exists(n.body)
    return Subtype(typeI=type1, typeII=type2, cosafe=_is_cosafe(n), safe=_is_safe(n))
