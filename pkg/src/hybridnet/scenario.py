"""Scenario files: an indented text format describing spaces, maps, systems,
networks and the analyses to run on them.

A file is a list of top-level blocks; children are indented under their
header and ``#`` starts a comment.  Names refer to earlier blocks.

::

    scenario NAME
    param NAME = EXPR
    space NAME                              node/edge lines below
      node NODE: BOX                        BOX is "point" or intervals joined by "*"
      edge ID: NODE -> NODE                 one relation line below
        maps EXPRS [where COND]             target = EXPRS(source), source guard
        where COND                          predicate over x (source) and y (target)
        diagonal | any
    space NAME = SPACE * SPACE [* ...]      left-nested product
    morphism NAME: SPACE -> SPACE           rules below, or "= identity" / "= projection K"
      node PATTERN -> NODE: EXPRS
      edge ID -> ID                         only where the edge map is ambiguous
    ssub NAME: SPACE -> SPACE via MORPHISM
    ssub NAME = identity SPACE
    ssub NAME = SSUB * SSUB [* ...]
    ssub_morphism NAME: SSUB -> SSUB
      total MORPHISM
      state MORPHISM
      inverse MORPHISM                      required for interconnections
    control NAME on SSUB_OR_SPACE
      node PATTERN
        flow EXPRS
        jump when COND to NODE: EXPRS       first matching rule wins, else no jump
        event EXPRS                         omit when no event functions are known
    control NAME = interconnect SSUB_MORPHISM of CONTROL [* CONTROL ...]
    network NAME
      entry LABEL: SSUB
      bound SSUB
      iota SSUB_MORPHISM
    network_morphism NAME: NETWORK -> NETWORK
      label LABEL -> LABEL via SSUB_MORPHISM
      z SSUB_MORPHISM
    simulate NAME
      control CONTROL
      initial NODE: EXPRS
      OPTION EXPR                           horizon, step, max_jumps, min_dwell, event_tol
    theorem NAME
      morphism NETWORK_MORPHISM
      w LABEL: CONTROL
      v LABEL: CONTROL
      initial NODE: EXPRS                   optional invariance run from this point
      OPTION EXPR                           samples, tol, horizon, step, ...
    stability NAME
      map MORPHISM
      source CONTROL
      target CONTROL
      initial EXPRS
      epsilons EXPRS
      grid LO, HI, COUNT
      OPTION EXPR                           horizon, step

Intervals are written ``[a, b]``, ``(a, b)``, ``[a, inf)`` and so on; ``R`` is
the whole line.  Patterns bind node components to names usable in
expressions; ``_`` matches anything.  Bare names are string atoms where a
literal node, edge or label is expected; inside patterns and node
expressions strings must be quoted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np

from .expr import (
    BOOL,
    NODE,
    REAL,
    Expr,
    ExprError,
    Name,
    Num,
    Parser,
    Scope,
    Str,
    TupleExpr,
    Unary,
    check_type,
    compile_expr,
    derivative,
    match_pattern,
    node_value,
    pattern_names,
    tokenize,
    unparse,
)
from .morphisms import (
    HybridSSub,
    MorphismError,
    PhaseSpaceMorphism,
    SmoothMap,
    SSubMorphism,
    apply,
    identity,
    product_ssub,
    projection,
    same_space,
    ssub_identity,
)
from .phase_space import (
    BoxSpace,
    HybridPhaseSpace,
    Interval,
    JumpRelation,
    PhaseSpaceError,
    TaggedPoint,
    product_space,
)
from .sampling import sample_box
from .systems import DeterministicControl, SystemsError, interconnect_control, product_control

OPTION_KEYS = {
    "simulate": ("horizon", "step", "max_jumps", "min_dwell", "event_tol"),
    "theorem": ("samples", "tol", "hypothesis_tol", "invariance_tol", "seed", "horizon", "step", "max_jumps", "min_dwell", "event_tol"),
    "stability": ("horizon", "step"),
}


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"

    def to_dict(self) -> dict[str, Any]:
        return {"line": self.line, "col": self.col, "message": self.message}


class ScenarioError(ValueError):
    def __init__(self, diagnostics: Sequence[Diagnostic]) -> None:
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


# --------------------------------------------------------------------------- syntax tree

Pos = dict(compare=False, default=0, kw_only=True)


@dataclass(frozen=True)
class Decl:
    line: int = field(**Pos)
    col: int = field(**Pos)


@dataclass(frozen=True)
class ParamDecl(Decl):
    name: str
    value: Expr


@dataclass(frozen=True)
class IntervalSpec:
    lo: "Expr | None"  # None for the whole line
    hi: "Expr | None"
    lo_closed: bool = False
    hi_closed: bool = False


@dataclass(frozen=True)
class NodeDecl(Decl):
    node: Expr
    box: tuple[IntervalSpec, ...]


@dataclass(frozen=True)
class RelationSpec(Decl):
    kind: str  # maps, where, diagonal, any
    exprs: tuple[Expr, ...] = ()
    guard: "Expr | None" = None


@dataclass(frozen=True)
class EdgeDecl(Decl):
    id: Expr
    src: Expr
    tgt: Expr
    relation: RelationSpec


@dataclass(frozen=True)
class SpaceDecl(Decl):
    name: str
    nodes: tuple[NodeDecl, ...]
    edges: tuple[EdgeDecl, ...]


@dataclass(frozen=True)
class ProductSpaceDecl(Decl):
    name: str
    factors: tuple[str, ...]


@dataclass(frozen=True)
class NodeRule(Decl):
    pattern: Expr
    target: Expr
    exprs: tuple[Expr, ...]


@dataclass(frozen=True)
class EdgeRule(Decl):
    src: Expr
    tgt: Expr


@dataclass(frozen=True)
class MorphismDecl(Decl):
    name: str
    domain: str
    codomain: str
    rules: tuple[NodeRule, ...] = ()
    edges: tuple[EdgeRule, ...] = ()
    builtin: "tuple[str, ...] | None" = None  # ("identity",) or ("projection", k)


@dataclass(frozen=True)
class SSubDecl(Decl):
    name: str
    total: str
    state: str
    proj: str


@dataclass(frozen=True)
class SSubIdentityDecl(Decl):
    name: str
    space: str


@dataclass(frozen=True)
class SSubProductDecl(Decl):
    name: str
    factors: tuple[str, ...]


@dataclass(frozen=True)
class SSubMorphismDecl(Decl):
    name: str
    domain: str
    codomain: str
    total: str
    state: str
    inverse: "str | None" = None


@dataclass(frozen=True)
class JumpRule(Decl):
    cond: Expr
    target: Expr
    exprs: tuple[Expr, ...]


@dataclass(frozen=True)
class ControlRule(Decl):
    pattern: Expr
    flow: tuple[Expr, ...]
    jumps: tuple[JumpRule, ...] = ()
    events: "tuple[Expr, ...] | None" = None


@dataclass(frozen=True)
class ControlDecl(Decl):
    name: str
    on: str
    rules: tuple[ControlRule, ...]


@dataclass(frozen=True)
class InterconnectDecl(Decl):
    name: str
    iota: str
    parts: tuple[str, ...]


@dataclass(frozen=True)
class NetworkDecl(Decl):
    name: str
    entries: tuple[tuple[Expr, str], ...]
    bound: str
    iota: str


@dataclass(frozen=True)
class NetworkMorphismDecl(Decl):
    name: str
    source: str
    target: str
    labels: tuple[tuple[Expr, Expr, str], ...]
    z: str


@dataclass(frozen=True)
class SimulateDecl(Decl):
    name: str
    control: str
    node: Expr
    coords: tuple[Expr, ...]
    options: tuple[tuple[str, Expr], ...] = ()


@dataclass(frozen=True)
class TheoremDecl(Decl):
    name: str
    morphism: str
    w: tuple[tuple[Expr, str], ...]
    v: tuple[tuple[Expr, str], ...]
    initial: "tuple[Expr, tuple[Expr, ...]] | None" = None
    options: tuple[tuple[str, Expr], ...] = ()


@dataclass(frozen=True)
class StabilityDecl(Decl):
    name: str
    map: "str | None"  # None: only the source system is examined
    source: str
    target: "str | None"
    initial: tuple[Expr, ...]
    epsilons: tuple[Expr, ...]
    grid: "tuple[Expr, Expr, Expr] | None"
    options: tuple[tuple[str, Expr], ...] = ()


ANALYSES = (SimulateDecl, TheoremDecl, StabilityDecl)


@dataclass(frozen=True)
class Scenario:
    name: str
    decls: tuple[Decl, ...]

    def find(self, name: str) -> "Decl | None":
        for d in self.decls:
            if getattr(d, "name", None) == name:
                return d
        return None

    def analyses(self, kind: "type | None" = None) -> list[Decl]:
        want = kind or ANALYSES
        return [d for d in self.decls if isinstance(d, want)]

    def serialize(self) -> str:
        return serialize(self)


# --------------------------------------------------------------------------- lines


@dataclass
class _Line:
    number: int
    indent: int
    text: str
    children: list["_Line"] = field(default_factory=list)

    def tokens(self) -> Parser:
        return Parser(tokenize(self.text, self.number, self.indent + 1))


def _strip_comment(raw: str) -> str:
    quoted = False
    for i, ch in enumerate(raw):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return raw[:i]
    return raw


def _tree(text: str, diags: list[Diagnostic]) -> list[_Line]:
    roots: list[_Line] = []
    stack: list[_Line] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw).rstrip()
        if not body.strip():
            continue
        head = body[: len(body) - len(body.lstrip())]
        if "\t" in head:
            diags.append(Diagnostic(number, 1, "tabs are not allowed in indentation"))
            continue
        line = _Line(number, len(head), body.strip())
        while stack and stack[-1].indent >= line.indent:
            stack.pop()
        if stack:
            stack[-1].children.append(line)
        elif line.indent:
            diags.append(Diagnostic(number, 1, "unexpected indentation"))
            continue
        else:
            roots.append(line)
        stack.append(line)
    return roots


# --------------------------------------------------------------------------- parsing


def _word(p: Parser, what: str = "a name") -> str:
    t = p.tok
    if t.kind != "name":
        p.error(f"expected {what}")
    p.advance()
    return t.text


def _keyword(p: Parser, *words: str) -> str:
    t = p.tok
    if t.kind != "name" or t.text not in words:
        p.error("expected " + " or ".join(repr(w) for w in words))
    p.advance()
    return t.text


def _literal(p: Parser) -> Expr:
    """A node, edge or label literal: a bare name, or a number, string or tuple."""
    t = p.tok
    if t.kind == "name" and t.text not in ("inf", "pi", "true", "false"):
        p.advance()
        return Name(t.text, line=t.line, col=t.col)
    return p.expression(45)  # above comparisons so "->" and ":" terminate it


def _interval(p: Parser) -> IntervalSpec:
    t = p.tok
    if t.kind == "name" and t.text == "R":
        p.advance()
        return IntervalSpec(None, None)
    opener = p.advance()
    if opener.text not in ("[", "("):
        p.error("expected an interval", opener)
    lo = p.expression()
    p.expect(",")
    hi = p.expression()
    closer = p.advance()
    if closer.text not in ("]", ")"):
        p.error("expected ']' or ')'", closer)
    return IntervalSpec(lo, hi, opener.text == "[", closer.text == "]")


def _box(p: Parser) -> tuple[IntervalSpec, ...]:
    if p.tok.kind == "name" and p.tok.text == "point":
        p.advance()
        return ()
    out = [_interval(p)]
    while p.accept("*"):
        out.append(_interval(p))
    return tuple(out)


def _exprs(p: Parser) -> tuple[Expr, ...]:
    if p.tok.kind == "end":
        return ()
    return tuple(p.expression_list())


def _no_children(line: _Line) -> None:
    if line.children:
        c = line.children[0]
        raise ExprError("this line takes no indented block", c.number, c.indent + 1)


def _pos(line: _Line) -> dict[str, int]:
    return dict(line=line.number, col=line.indent + 1)


def _parse_relation(line: _Line) -> RelationSpec:
    _no_children(line)
    p = line.tokens()
    kind = _keyword(p, "maps", "where", "diagonal", "any")
    if kind == "maps":
        exprs = tuple(p.expression_list())
        guard = p.expression() if p.accept("where") else None
        p.expect_end()
        return RelationSpec("maps", exprs, guard, **_pos(line))
    if kind == "where":
        guard = p.expression()
        p.expect_end()
        return RelationSpec("where", (), guard, **_pos(line))
    p.expect_end()
    return RelationSpec(kind, **_pos(line))


def _parse_space(line: _Line, p: Parser) -> Decl:
    name = _word(p)
    if p.accept("="):
        _no_children(line)
        factors = [_word(p, "a space name")]
        while p.accept("*"):
            factors.append(_word(p, "a space name"))
        p.expect_end()
        if len(factors) < 2:
            p.error("a product needs at least two factors")
        return ProductSpaceDecl(name, tuple(factors), **_pos(line))
    p.expect_end()
    nodes, edges = [], []
    for c in line.children:
        q = c.tokens()
        kind = _keyword(q, "node", "edge")
        if kind == "node":
            _no_children(c)
            node = _literal(q)
            q.expect(":")
            box = _box(q)
            q.expect_end()
            nodes.append(NodeDecl(node, box, **_pos(c)))
        else:
            eid = _literal(q)
            q.expect(":")
            src = _literal(q)
            q.expect("->")
            tgt = _literal(q)
            q.expect_end()
            if len(c.children) != 1:
                raise ExprError("an edge needs exactly one relation line", c.number, c.indent + 1)
            edges.append(EdgeDecl(eid, src, tgt, _parse_relation(c.children[0]), **_pos(c)))
    if not nodes:
        raise ExprError(f"space {name!r} has no nodes", line.number, line.indent + 1)
    return SpaceDecl(name, tuple(nodes), tuple(edges), **_pos(line))


def _arrow(p: Parser) -> tuple[str, str]:
    p.expect(":")
    a = _word(p)
    p.expect("->")
    b = _word(p)
    return a, b


def _parse_morphism(line: _Line, p: Parser) -> Decl:
    name = _word(p)
    dom, cod = _arrow(p)
    if p.accept("="):
        _no_children(line)
        kind = _keyword(p, "identity", "projection")
        if kind == "identity":
            p.expect_end()
            return MorphismDecl(name, dom, cod, builtin=("identity",), **_pos(line))
        t = p.advance()
        if t.kind != "num" or not t.text.isdigit():
            p.error("expected a factor index", t)
        p.expect_end()
        return MorphismDecl(name, dom, cod, builtin=("projection", t.text), **_pos(line))
    p.expect_end()
    rules, edges = [], []
    for c in line.children:
        _no_children(c)
        q = c.tokens()
        kind = _keyword(q, "node", "edge")
        if kind == "node":
            pat = q.expression(45)
            q.expect("->")
            tgt = q.expression(45)
            q.expect(":")
            exprs = _exprs(q)
            q.expect_end()
            rules.append(NodeRule(pat, tgt, exprs, **_pos(c)))
        else:
            a = _literal(q)
            q.expect("->")
            b = _literal(q)
            q.expect_end()
            edges.append(EdgeRule(a, b, **_pos(c)))
    if not rules:
        raise ExprError(f"morphism {name!r} has no node rules", line.number, line.indent + 1)
    return MorphismDecl(name, dom, cod, tuple(rules), tuple(edges), **_pos(line))


def _parse_ssub(line: _Line, p: Parser) -> Decl:
    _no_children(line)
    name = _word(p)
    if p.accept("="):
        if p.tok.kind == "name" and p.tok.text == "identity":
            p.advance()
            space = _word(p, "a space name")
            p.expect_end()
            return SSubIdentityDecl(name, space, **_pos(line))
        factors = [_word(p, "a submersion name")]
        while p.accept("*"):
            factors.append(_word(p, "a submersion name"))
        p.expect_end()
        if len(factors) < 2:
            p.error("a product needs at least two factors")
        return SSubProductDecl(name, tuple(factors), **_pos(line))
    tot, st = _arrow(p)
    _keyword(p, "via")
    proj = _word(p, "a morphism name")
    p.expect_end()
    return SSubDecl(name, tot, st, proj, **_pos(line))


def _fields(line: _Line, allowed: Sequence[str]) -> dict[str, list[tuple[_Line, Parser]]]:
    out: dict[str, list[tuple[_Line, Parser]]] = {}
    for c in line.children:
        _no_children(c)
        q = c.tokens()
        key = _keyword(q, *allowed)
        out.setdefault(key, []).append((c, q))
    return out


def _single(line: _Line, got: dict, key: str, required: bool = True) -> "tuple[_Line, Parser] | None":
    items = got.get(key, [])
    if len(items) > 1:
        c = items[1][0]
        raise ExprError(f"duplicate {key!r} line", c.number, c.indent + 1)
    if not items:
        if required:
            raise ExprError(f"missing {key!r} line", line.number, line.indent + 1)
        return None
    return items[0]


def _name_field(line: _Line, got: dict, key: str, required: bool = True) -> "str | None":
    hit = _single(line, got, key, required)
    if hit is None:
        return None
    _, q = hit
    v = _word(q)
    q.expect_end()
    return v


def _parse_ssub_morphism(line: _Line, p: Parser) -> Decl:
    name = _word(p)
    dom, cod = _arrow(p)
    p.expect_end()
    got = _fields(line, ("total", "state", "inverse"))
    return SSubMorphismDecl(
        name,
        dom,
        cod,
        _name_field(line, got, "total"),
        _name_field(line, got, "state"),
        _name_field(line, got, "inverse", False),
        **_pos(line),
    )


def _parse_control(line: _Line, p: Parser) -> Decl:
    name = _word(p)
    if p.accept("="):
        _no_children(line)
        _keyword(p, "interconnect")
        iota = _word(p, "a submersion morphism name")
        _keyword(p, "of")
        parts = [_word(p, "a control name")]
        while p.accept("*"):
            parts.append(_word(p, "a control name"))
        p.expect_end()
        return InterconnectDecl(name, iota, tuple(parts), **_pos(line))
    _keyword(p, "on")
    on = _word(p)
    p.expect_end()
    rules = []
    for c in line.children:
        q = c.tokens()
        _keyword(q, "node")
        pat = q.expression(45)
        q.expect_end()
        flow, jumps, events = None, [], None
        for g in c.children:
            _no_children(g)
            r = g.tokens()
            kind = _keyword(r, "flow", "jump", "event")
            if kind == "flow":
                if flow is not None:
                    raise ExprError("duplicate 'flow' line", g.number, g.indent + 1)
                flow = _exprs(r)
            elif kind == "event":
                if events is not None:
                    raise ExprError("duplicate 'event' line", g.number, g.indent + 1)
                events = _exprs(r)
            else:
                _keyword(r, "when")
                cond = r.expression()
                _keyword(r, "to")
                tgt = r.expression(45)
                r.expect(":")
                jumps.append(JumpRule(cond, tgt, _exprs(r), **_pos(g)))
            r.expect_end()
        if flow is None:
            raise ExprError("missing 'flow' line", c.number, c.indent + 1)
        rules.append(ControlRule(pat, flow, tuple(jumps), events, **_pos(c)))
    if not rules:
        raise ExprError(f"control {name!r} has no node blocks", line.number, line.indent + 1)
    return ControlDecl(name, on, tuple(rules), **_pos(line))


def _labelled(items: list[tuple[_Line, Parser]]) -> tuple[tuple[Expr, str], ...]:
    out = []
    for _, q in items:
        label = _literal(q)
        q.expect(":")
        out.append((label, _word(q)))
        q.expect_end()
    return tuple(out)


def _parse_network(line: _Line, p: Parser) -> Decl:
    name = _word(p)
    p.expect_end()
    got = _fields(line, ("entry", "bound", "iota"))
    return NetworkDecl(
        name,
        _labelled(got.get("entry", [])),
        _name_field(line, got, "bound"),
        _name_field(line, got, "iota"),
        **_pos(line),
    )


def _parse_network_morphism(line: _Line, p: Parser) -> Decl:
    name = _word(p)
    src, tgt = _arrow(p)
    p.expect_end()
    got = _fields(line, ("label", "z"))
    labels = []
    for _, q in got.get("label", []):
        x = _literal(q)
        q.expect("->")
        y = _literal(q)
        _keyword(q, "via")
        labels.append((x, y, _word(q)))
        q.expect_end()
    return NetworkMorphismDecl(name, src, tgt, tuple(labels), _name_field(line, got, "z"), **_pos(line))


def _options(got: dict, keys: Sequence[str]) -> tuple[tuple[str, Expr], ...]:
    out = []
    for k in keys:
        for c, q in got.get(k, []):
            v = q.expression()
            q.expect_end()
            out.append((k, v))
    return tuple(out)


def _initial(hit: tuple[_Line, Parser]) -> tuple[Expr, tuple[Expr, ...]]:
    _, q = hit
    node = _literal(q)
    q.expect(":")
    coords = _exprs(q)
    q.expect_end()
    return node, coords


def _parse_simulate(line: _Line, p: Parser) -> Decl:
    name = _word(p)
    p.expect_end()
    keys = OPTION_KEYS["simulate"]
    got = _fields(line, ("control", "initial") + keys)
    node, coords = _initial(_single(line, got, "initial"))
    return SimulateDecl(name, _name_field(line, got, "control"), node, coords, _options(got, keys), **_pos(line))


def _parse_theorem(line: _Line, p: Parser) -> Decl:
    name = _word(p)
    p.expect_end()
    keys = OPTION_KEYS["theorem"]
    got = _fields(line, ("morphism", "w", "v", "initial") + keys)
    hit = _single(line, got, "initial", False)
    return TheoremDecl(
        name,
        _name_field(line, got, "morphism"),
        _labelled(got.get("w", [])),
        _labelled(got.get("v", [])),
        _initial(hit) if hit else None,
        _options(got, keys),
        **_pos(line),
    )


def _parse_stability(line: _Line, p: Parser) -> Decl:
    name = _word(p)
    p.expect_end()
    keys = OPTION_KEYS["stability"]
    got = _fields(line, ("map", "source", "target", "initial", "epsilons", "grid") + keys)

    def exprs(key: str) -> tuple[Expr, ...]:
        c, q = _single(line, got, key)
        v = _exprs(q)
        q.expect_end()
        return v

    fmap = _name_field(line, got, "map", False)
    target = _name_field(line, got, "target", fmap is not None)
    if fmap is None and (target is not None or "grid" in got):
        raise ExprError("'target' and 'grid' need a 'map' line", line.number, line.indent + 1)
    grid = None
    if fmap is not None:
        g = exprs("grid")
        if len(g) != 3:
            c = got["grid"][0][0]
            raise ExprError("grid takes LO, HI, COUNT", c.number, c.indent + 1)
        grid = (g[0], g[1], g[2])
    return StabilityDecl(
        name,
        fmap,
        _name_field(line, got, "source"),
        target,
        exprs("initial"),
        exprs("epsilons"),
        grid,
        _options(got, keys),
        **_pos(line),
    )


_PARSERS: dict[str, Callable[[_Line, Parser], Decl]] = {
    "space": _parse_space,
    "morphism": _parse_morphism,
    "ssub": _parse_ssub,
    "ssub_morphism": _parse_ssub_morphism,
    "control": _parse_control,
    "network": _parse_network,
    "network_morphism": _parse_network_morphism,
    "simulate": _parse_simulate,
    "theorem": _parse_theorem,
    "stability": _parse_stability,
}


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text.

    Raises:
        ScenarioError: listing every positioned diagnostic found; parsing
            continues with the next top-level block after an error.
    """
    diags: list[Diagnostic] = []
    roots = _tree(text, diags)
    name = None
    decls: list[Decl] = []
    seen: dict[str, int] = {}
    for line in roots:
        try:
            p = line.tokens()
            kw = _keyword(p, "scenario", "param", *_PARSERS)
            if kw == "scenario":
                _no_children(line)
                if name is not None:
                    p.error("duplicate scenario header")
                name = _word(p)
                p.expect_end()
                continue
            if kw == "param":
                _no_children(line)
                pname = _word(p)
                p.expect("=")
                value = p.expression()
                p.expect_end()
                decl: Decl = ParamDecl(pname, value, **_pos(line))
            else:
                decl = _PARSERS[kw](line, p)
            dname = getattr(decl, "name")
            if dname in seen:
                raise ExprError(f"name {dname!r} already defined on line {seen[dname]}", line.number, line.indent + 1)
            seen[dname] = line.number
            decls.append(decl)
        except ExprError as exc:
            diags.append(Diagnostic(exc.line, exc.col, exc.message))
    if name is None and not diags:
        diags.append(Diagnostic(1, 1, "missing 'scenario NAME' header"))
    if diags:
        raise ScenarioError(diags)
    return Scenario(name, tuple(decls))


# --------------------------------------------------------------------------- serialization


def _lit(e: Expr) -> str:
    return e.name if isinstance(e, Name) else unparse(e)


def _join(es: Sequence[Expr]) -> str:
    return ", ".join(unparse(e) for e in es)


def _interval_text(iv: IntervalSpec) -> str:
    if iv.lo is None:
        return "R"
    return ("[" if iv.lo_closed else "(") + f"{unparse(iv.lo)}, {unparse(iv.hi)}" + ("]" if iv.hi_closed else ")")


def _with_list(head: str, es: Sequence[Expr]) -> str:
    return f"{head} {_join(es)}" if es else head


def _decl_lines(d: Decl) -> list[str]:
    if isinstance(d, ParamDecl):
        return [f"param {d.name} = {unparse(d.value)}"]
    if isinstance(d, ProductSpaceDecl):
        return [f"space {d.name} = " + " * ".join(d.factors)]
    if isinstance(d, SpaceDecl):
        out = [f"space {d.name}"]
        for n in d.nodes:
            box = " * ".join(_interval_text(iv) for iv in n.box) if n.box else "point"
            out.append(f"  node {_lit(n.node)}: {box}")
        for e in d.edges:
            out.append(f"  edge {_lit(e.id)}: {_lit(e.src)} -> {_lit(e.tgt)}")
            r = e.relation
            if r.kind == "maps":
                out.append(f"    maps {_join(r.exprs)}" + (f" where {unparse(r.guard)}" if r.guard is not None else ""))
            elif r.kind == "where":
                out.append(f"    where {unparse(r.guard)}")
            else:
                out.append(f"    {r.kind}")
        return out
    if isinstance(d, MorphismDecl):
        head = f"morphism {d.name}: {d.domain} -> {d.codomain}"
        if d.builtin:
            return [head + " = " + " ".join(d.builtin)]
        out = [head]
        for r in d.rules:
            out.append(f"  node {unparse(r.pattern)} -> {unparse(r.target)}:" + (f" {_join(r.exprs)}" if r.exprs else ""))
        for e in d.edges:
            out.append(f"  edge {_lit(e.src)} -> {_lit(e.tgt)}")
        return out
    if isinstance(d, SSubDecl):
        return [f"ssub {d.name}: {d.total} -> {d.state} via {d.proj}"]
    if isinstance(d, SSubIdentityDecl):
        return [f"ssub {d.name} = identity {d.space}"]
    if isinstance(d, SSubProductDecl):
        return [f"ssub {d.name} = " + " * ".join(d.factors)]
    if isinstance(d, SSubMorphismDecl):
        out = [f"ssub_morphism {d.name}: {d.domain} -> {d.codomain}", f"  total {d.total}", f"  state {d.state}"]
        if d.inverse:
            out.append(f"  inverse {d.inverse}")
        return out
    if isinstance(d, ControlDecl):
        out = [f"control {d.name} on {d.on}"]
        for r in d.rules:
            out.append(f"  node {unparse(r.pattern)}")
            out.append("    " + _with_list("flow", r.flow))
            for j in r.jumps:
                out.append(
                    f"    jump when {unparse(j.cond)} to {unparse(j.target)}:" + (f" {_join(j.exprs)}" if j.exprs else "")
                )
            if r.events is not None:
                out.append("    " + _with_list("event", r.events))
        return out
    if isinstance(d, InterconnectDecl):
        return [f"control {d.name} = interconnect {d.iota} of " + " * ".join(d.parts)]
    if isinstance(d, NetworkDecl):
        out = [f"network {d.name}"]
        out += [f"  entry {_lit(x)}: {s}" for x, s in d.entries]
        out += [f"  bound {d.bound}", f"  iota {d.iota}"]
        return out
    if isinstance(d, NetworkMorphismDecl):
        out = [f"network_morphism {d.name}: {d.source} -> {d.target}"]
        out += [f"  label {_lit(x)} -> {_lit(y)} via {m}" for x, y, m in d.labels]
        out.append(f"  z {d.z}")
        return out
    opts = [f"  {k} {unparse(v)}" for k, v in getattr(d, "options", ())]
    if isinstance(d, SimulateDecl):
        return [f"simulate {d.name}", f"  control {d.control}", f"  initial {_lit(d.node)}: {_join(d.coords)}"] + opts
    if isinstance(d, TheoremDecl):
        out = [f"theorem {d.name}", f"  morphism {d.morphism}"]
        out += [f"  w {_lit(x)}: {c}" for x, c in d.w]
        out += [f"  v {_lit(x)}: {c}" for x, c in d.v]
        if d.initial is not None:
            out.append(f"  initial {_lit(d.initial[0])}: {_join(d.initial[1])}")
        return out + opts
    if isinstance(d, StabilityDecl):
        out = [f"stability {d.name}"]
        if d.map is not None:
            out.append(f"  map {d.map}")
        out.append(f"  source {d.source}")
        if d.target is not None:
            out.append(f"  target {d.target}")
        out += [f"  initial {_join(d.initial)}", f"  epsilons {_join(d.epsilons)}"]
        if d.grid is not None:
            out.append(f"  grid {_join(d.grid)}")
        return out + opts
    raise TypeError(f"cannot serialize {d!r}")


def serialize(s: Scenario) -> str:
    """Canonical text; ``parse_scenario(serialize(s)) == s``."""
    blocks = [[f"scenario {s.name}"]] + [_decl_lines(d) for d in s.decls]
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"


# --------------------------------------------------------------------------- building


@dataclass
class Model:
    """Objects built from a scenario, by name."""

    scenario: Scenario
    params: dict[str, float]
    spaces: dict[str, HybridPhaseSpace] = field(default_factory=dict)
    morphisms: dict[str, PhaseSpaceMorphism] = field(default_factory=dict)
    ssubs: dict[str, HybridSSub] = field(default_factory=dict)
    ssub_morphisms: dict[str, SSubMorphism] = field(default_factory=dict)
    controls: dict[str, DeterministicControl] = field(default_factory=dict)
    networks: dict[str, Any] = field(default_factory=dict)
    network_morphisms: dict[str, Any] = field(default_factory=dict)

    def literal(self, e: Expr) -> Any:
        return _literal_value(e, self.params)

    def number(self, e: Expr) -> float:
        return _number(e, self.params)

    def control_space(self, name: str) -> DeterministicControl:
        return self.controls[name]


class _BuildError(Exception):
    def __init__(self, message: str, at: "Decl | Expr") -> None:
        super().__init__(message)
        self.message = message
        self.line = at.line
        self.col = at.col


def _literal_value(e: Expr, params: dict[str, float]) -> Any:
    if isinstance(e, Name):
        return e.name
    return node_value(e, Scope({}, params))


def _number(e: Expr, params: dict[str, float]) -> float:
    if check_type(e, Scope({}, params)) != REAL:
        raise ExprError("expected a real number", e.line, e.col)
    return float(compile_expr(e, Scope({}, params))({}, 0.0))


def _compile_vector(exprs: Sequence[Expr], scope: Scope) -> Callable[[np.ndarray], np.ndarray]:
    for e in exprs:
        if check_type(e, scope) != REAL:
            raise ExprError("expected a real expression", e.line, e.col)
    fns = [compile_expr(e, scope) for e in exprs]
    n = len(fns)

    def run(x: np.ndarray) -> np.ndarray:
        env = {"x": x}
        out = np.empty(n)
        for k, f in enumerate(fns):
            out[k] = f(env, 0.0)
        return out

    return run


def _smooth(exprs: Sequence[Expr], scope: Scope, in_dim: int) -> SmoothMap:
    """Smooth map from coordinate expressions with a symbolic Jacobian."""
    f = _compile_vector(exprs, scope)
    parts = [[derivative(e, f"x{k}") for k in range(in_dim)] for e in exprs]
    flat = [d for row in parts for d in row]
    jf = _compile_vector(flat, scope) if flat else None
    shape = (len(exprs), in_dim)

    def jac(x: np.ndarray) -> np.ndarray:
        if jf is None:
            return np.zeros(shape)
        return jf(x).reshape(shape)

    return SmoothMap(f, in_dim, len(exprs), jac)


def _match_rule(rules: Sequence[Any], node: Any) -> "tuple[Any, dict[str, Any]] | None":
    for r in rules:
        b = match_pattern(r.pattern, node)
        if b is not None:
            return r, b
    return None


def _bindings_scope(params: dict[str, float], bindings: dict[str, Any], coords: dict[str, int]) -> Scope:
    clash = set(bindings) & set(params)
    if clash:
        raise ExprError(f"pattern variable {sorted(clash)[0]!r} shadows a parameter")
    return Scope(coords, {**params, **bindings})


def _relation(r: RelationSpec, src: BoxSpace, tgt: BoxSpace, params: dict[str, float]) -> JumpRelation:
    if r.kind == "diagonal":
        return JumpRelation.diagonal()
    if r.kind == "any":
        return JumpRelation.anything()
    scope = Scope({"x": src.dim, "y": tgt.dim}, params)
    guard = None
    if r.guard is not None:
        if check_type(r.guard, scope) != BOOL:
            raise ExprError("a relation condition must be boolean", r.guard.line, r.guard.col)
        guard = compile_expr(r.guard, scope)
    if r.kind == "where":

        def test(x: np.ndarray, y: np.ndarray, tol: float) -> bool:
            return bool(guard({"x": x, "y": y}, tol))

        return JumpRelation.predicate(test, description=unparse(r.guard))
    if len(r.exprs) != tgt.dim:
        raise ExprError(f"relation gives {len(r.exprs)} coordinates, target has {tgt.dim}", r.line, r.col)
    g = _compile_vector(r.exprs, Scope({"x": src.dim}, params))

    def test_map(x: np.ndarray, y: np.ndarray, tol: float) -> bool:
        if y.shape[0] != tgt.dim:
            return False
        if guard is not None and not guard({"x": x, "y": y}, tol):
            return False
        return bool(np.all(np.abs(y - g(x)) <= tol))

    def sampler(n: int, rng: np.random.Generator):
        out = []
        for x in sample_box(src, 4 * n, rng):
            if guard is not None and not guard({"x": x, "y": np.zeros(tgt.dim)}, 0.0):
                continue
            y = g(x)
            if tgt.contains(y):
                out.append((x, y))
            if len(out) >= n:
                break
        return out or None

    desc = "y = " + _join(r.exprs) + (f" where {unparse(r.guard)}" if r.guard is not None else "")
    return JumpRelation.predicate(test_map, sampler, desc)


def _interval_value(iv: IntervalSpec, params: dict[str, float]) -> Interval:
    if iv.lo is None:
        return Interval()
    return Interval(_number(iv.lo, params), _number(iv.hi, params), iv.lo_closed, iv.hi_closed)


class _Builder:
    def __init__(self, scenario: Scenario, overrides: "dict[str, float] | None") -> None:
        self.s = scenario
        self.overrides = dict(overrides or {})
        self.m = Model(scenario, {})

    def get(self, table: dict[str, Any], name: str, kind: str, at: Decl) -> Any:
        if name not in table:
            raise _BuildError(f"unknown {kind} {name!r}", at)
        return table[name]

    def space(self, name: str, at: Decl) -> HybridPhaseSpace:
        return self.get(self.m.spaces, name, "space", at)

    def run(self) -> Model:
        known = {d.name for d in self.s.decls if isinstance(d, ParamDecl)}
        unknown = sorted(set(self.overrides) - known)
        if unknown:
            raise ScenarioError([Diagnostic(1, 1, f"unknown parameter {unknown[0]!r}")])
        diags: list[Diagnostic] = []
        for d in self.s.decls:
            try:
                self.build(d)
            except _BuildError as exc:
                diags.append(Diagnostic(exc.line, exc.col, exc.message))
            except ExprError as exc:
                line, col = (exc.line, exc.col) if exc.line > 1 or exc.col > 1 else (d.line, d.col)
                diags.append(Diagnostic(line, col, exc.message))
            except (PhaseSpaceError, MorphismError, ValueError) as exc:
                diags.append(Diagnostic(d.line, d.col, str(exc)))
        if diags:
            raise ScenarioError(diags)
        return self.m

    def build(self, d: Decl) -> None:
        m = self.m
        if isinstance(d, ParamDecl):
            m.params[d.name] = float(self.overrides[d.name]) if d.name in self.overrides else _number(d.value, m.params)
        elif isinstance(d, SpaceDecl):
            nodes: dict[Any, BoxSpace] = {}
            for n in d.nodes:
                key = _literal_value(n.node, m.params)
                if key in nodes:
                    raise _BuildError(f"duplicate node {key!r}", n)
                nodes[key] = BoxSpace(tuple(_interval_value(iv, m.params) for iv in n.box))
            edges = []
            for e in d.edges:
                s, t = _literal_value(e.src, m.params), _literal_value(e.tgt, m.params)
                for end, at in ((s, e.src), (t, e.tgt)):
                    if end not in nodes:
                        raise _BuildError(f"unknown node {end!r}", at)
                edges.append((_literal_value(e.id, m.params), s, t, _relation(e.relation, nodes[s], nodes[t], m.params)))
            m.spaces[d.name] = HybridPhaseSpace.build(nodes, edges, name=d.name)
        elif isinstance(d, ProductSpaceDecl):
            out = self.space(d.factors[0], d)
            for f in d.factors[1:]:
                out = product_space(out, self.space(f, d))
            m.spaces[d.name] = out
        elif isinstance(d, MorphismDecl):
            m.morphisms[d.name] = self.morphism(d)
        elif isinstance(d, SSubDecl):
            tot, st = self.space(d.total, d), self.space(d.state, d)
            proj = self.retarget(self.get(m.morphisms, d.proj, "morphism", d), tot, st, d)
            m.ssubs[d.name] = HybridSSub(tot, st, proj, True, d.name)
        elif isinstance(d, SSubIdentityDecl):
            s = ssub_identity(self.space(d.space, d))
            m.ssubs[d.name] = HybridSSub(s.total, s.state, s.proj, True, d.name)
        elif isinstance(d, SSubProductDecl):
            out = self.get(m.ssubs, d.factors[0], "submersion", d)
            for f in d.factors[1:]:
                out = product_ssub(out, self.get(m.ssubs, f, "submersion", d))
            m.ssubs[d.name] = HybridSSub(out.total, out.state, out.proj, out.asserted_surjective, d.name)
        elif isinstance(d, SSubMorphismDecl):
            a = self.get(m.ssubs, d.domain, "submersion", d)
            b = self.get(m.ssubs, d.codomain, "submersion", d)
            m.ssub_morphisms[d.name] = self.ssub_morphism(a, b, d)
        elif isinstance(d, ControlDecl):
            m.controls[d.name] = self.control(d)
        elif isinstance(d, InterconnectDecl):
            iota = self.get(m.ssub_morphisms, d.iota, "submersion morphism", d)
            parts = [self.get(m.controls, c, "control", d) for c in d.parts]
            prod = product_control(parts, iota.codomain) if len(parts) > 1 else parts[0]
            if not same_space(prod.ssub.total, iota.codomain.total):
                raise _BuildError(f"controls do not live on the codomain of {d.iota!r}", d)
            try:
                m.controls[d.name] = replace(interconnect_control(iota, prod), name=d.name)
            except SystemsError as exc:
                raise _BuildError(str(exc), d) from None
        elif isinstance(d, NetworkDecl):
            m.networks[d.name] = self.network(d)
        elif isinstance(d, NetworkMorphismDecl):
            m.network_morphisms[d.name] = self.network_morphism(d)
        elif isinstance(d, ANALYSES):
            self.check_analysis(d)

    def retarget(self, f: PhaseSpaceMorphism, dom: HybridPhaseSpace, cod: HybridPhaseSpace, at: Decl) -> PhaseSpaceMorphism:
        """The same morphism between structurally equal spaces."""
        if not same_space(f.domain, dom):
            raise _BuildError(f"morphism {f.name!r} does not start at {dom.name!r}", at)
        if not same_space(f.codomain, cod):
            raise _BuildError(f"morphism {f.name!r} does not land in {cod.name!r}", at)
        return PhaseSpaceMorphism(dom, cod, f.nodes, f.maps, f.name)

    def morphism(self, d: MorphismDecl) -> PhaseSpaceMorphism:
        dom, cod = self.space(d.domain, d), self.space(d.codomain, d)
        params = self.m.params
        if d.builtin and d.builtin[0] == "identity":
            return self.retarget(identity(dom), dom, cod, d)
        if d.builtin:
            k = int(d.builtin[1])
            if not dom.factors or k >= len(dom.factors):
                raise _BuildError(f"{d.domain!r} has no factor {k}", d)
            return self.retarget(projection(dom, k), dom, cod, d)
        node_map: dict[Any, Any] = {}
        maps: dict[Any, SmoothMap] = {}
        for n in dom.nodes:
            hit = _match_rule(d.rules, n)
            if hit is None:
                raise _BuildError(f"no rule matches node {n!r}", d)
            rule, b = hit
            scope = _bindings_scope(params, b, {"x": dom.dim(n)})
            target = node_value(rule.target, Scope({}, scope.values))
            if target not in cod.space:
                raise _BuildError(f"node {target!r} is not in {d.codomain!r}", rule.target)
            if len(rule.exprs) != cod.dim(target):
                raise _BuildError(
                    f"rule gives {len(rule.exprs)} coordinates, node {target!r} of {d.codomain!r} has {cod.dim(target)}",
                    rule,
                )
            node_map[n] = target
            maps[n] = _smooth(rule.exprs, scope, dom.dim(n))
        explicit = {_literal_value(e.src, params): _literal_value(e.tgt, params) for e in d.edges}
        return PhaseSpaceMorphism.build(dom, cod, node_map, maps, explicit or None, name=d.name)

    def ssub_morphism(self, a: HybridSSub, b: HybridSSub, d: SSubMorphismDecl) -> SSubMorphism:
        m = self.m
        tot = self.retarget(self.get(m.morphisms, d.total, "morphism", d), a.total, b.total, d)
        st = self.retarget(self.get(m.morphisms, d.state, "morphism", d), a.state, b.state, d)
        inv = None
        if d.inverse:
            inv = self.retarget(self.get(m.morphisms, d.inverse, "morphism", d), b.state, a.state, d)
        return SSubMorphism(a, b, tot, st, inv, d.name)

    def control(self, d: ControlDecl) -> DeterministicControl:
        m = self.m
        if d.on in m.ssubs:
            ssub = m.ssubs[d.on]
        elif d.on in m.spaces:
            ssub = ssub_identity(m.spaces[d.on])
        else:
            raise _BuildError(f"unknown submersion or space {d.on!r}", d)
        tot, st, proj = ssub.total, ssub.state, ssub.proj
        closed = d.on in m.spaces
        flows: dict[Any, Callable[[np.ndarray], np.ndarray]] = {}
        jumps: dict[Any, list[tuple[Callable, Any, Callable]]] = {}
        events: dict[Any, list[Callable[[np.ndarray], float]]] = {}
        for n in tot.nodes:
            hit = _match_rule(d.rules, n)
            if hit is None:
                raise _BuildError(f"no node block matches node {n!r}", d)
            rule, b = hit
            scope = _bindings_scope(m.params, b, {"x": tot.dim(n)})
            base = proj.nodes(n)
            if len(rule.flow) != st.dim(base):
                raise _BuildError(f"flow has {len(rule.flow)} components, state node {base!r} has {st.dim(base)}", rule)
            flows[n] = _compile_vector(rule.flow, scope)
            rules = []
            for j in rule.jumps:
                if check_type(j.cond, scope) != BOOL:
                    raise _BuildError("jump condition must be boolean", j.cond)
                target = node_value(j.target, Scope({}, scope.values))
                if target not in st.space:
                    raise _BuildError(f"jump target {target!r} is not a state node", j.target)
                if len(j.exprs) != st.dim(target):
                    raise _BuildError(f"jump gives {len(j.exprs)} coordinates, node {target!r} has {st.dim(target)}", j)
                rules.append((compile_expr(j.cond, scope), target, _compile_vector(j.exprs, scope)))
            jumps[n] = rules
            if rule.events is not None:
                fns = _compile_vector(rule.events, scope) if rule.events else None
                events[n] = [] if fns is None else [(lambda x, k=k, fns=fns: float(fns(x)[k])) for k in range(len(rule.events))]

        def vf(p: TaggedPoint) -> np.ndarray:
            return flows[p.node](p.coords)

        def jump(p: TaggedPoint) -> TaggedPoint:
            env = {"x": p.coords}
            for cond, target, coords in jumps[p.node]:
                if cond(env, 0.0):
                    return TaggedPoint(target, coords(p.coords))
            return p if closed else apply(proj, p, check=False)

        return DeterministicControl(ssub, vf, jump, events, d.name)

    def network(self, d: NetworkDecl) -> Any:
        from .networks import Network, SystemList, pi_product

        m = self.m
        labels, entries = [], {}
        for label, ssub in d.entries:
            x = _literal_value(label, m.params)
            if x in entries:
                raise _BuildError(f"duplicate label {x!r}", label)
            labels.append(x)
            entries[x] = self.get(m.ssubs, ssub, "submersion", d)
        systems = SystemList(tuple(labels), entries)
        bound = self.get(m.ssubs, d.bound, "submersion", d)
        iota = self.get(m.ssub_morphisms, d.iota, "submersion morphism", d)
        prod = pi_product(systems)
        iota = SSubMorphism(
            bound,
            prod,
            self.retarget(iota.f_tot, bound.total, prod.total, d),
            self.retarget(iota.f_st, bound.state, prod.state, d),
            None if iota.st_inverse is None else self.retarget(iota.st_inverse, prod.state, bound.state, d),
            iota.name,
        )
        if iota.st_inverse is None:
            raise _BuildError(f"interconnection {d.iota!r} needs an inverse line", d)
        return Network(systems, bound, iota, d.name)

    def network_morphism(self, d: NetworkMorphismDecl) -> Any:
        from .networks import ListMorphism, NetworkMorphism

        m = self.m
        X = self.get(m.networks, d.source, "network", d)
        Y = self.get(m.networks, d.target, "network", d)
        label_map, comps = {}, {}
        for lx, ly, name in d.labels:
            x, y = _literal_value(lx, m.params), _literal_value(ly, m.params)
            if x not in X.systems.entries:
                raise _BuildError(f"{x!r} is not a label of {d.source!r}", lx)
            if y not in Y.systems.entries:
                raise _BuildError(f"{y!r} is not a label of {d.target!r}", ly)
            phi = self.get(m.ssub_morphisms, name, "submersion morphism", d)
            label_map[x] = y
            comps[x] = self.ssub_morphism_between(phi, Y.systems[y], X.systems[x], d)
        missing = [x for x in X.systems.labels if x not in label_map]
        if missing:
            raise _BuildError(f"label {missing[0]!r} has no image", d)
        z = self.ssub_morphism_between(self.get(m.ssub_morphisms, d.z, "submersion morphism", d), Y.bound, X.bound, d)
        lm = ListMorphism(X.systems, Y.systems, label_map, comps)
        return NetworkMorphism(X, Y, lm, z)

    def ssub_morphism_between(self, f: SSubMorphism, a: HybridSSub, b: HybridSSub, at: Decl) -> SSubMorphism:
        inv = None if f.st_inverse is None else self.retarget(f.st_inverse, b.state, a.state, at)
        return SSubMorphism(
            a, b, self.retarget(f.f_tot, a.total, b.total, at), self.retarget(f.f_st, a.state, b.state, at), inv, f.name
        )

    def check_analysis(self, d: Decl) -> None:
        m = self.m
        for _, v in getattr(d, "options", ()):
            _number(v, m.params)
        if isinstance(d, SimulateDecl):
            c = self.get(m.controls, d.control, "control", d)
            node = _literal_value(d.node, m.params)
            if node not in c.ssub.total.space:
                raise _BuildError(f"node {node!r} is not in the control's space", d.node)
            for e in d.coords:
                _number(e, m.params)
        elif isinstance(d, TheoremDecl):
            self.get(m.network_morphisms, d.morphism, "network morphism", d)
            for _, c in d.w + d.v:
                self.get(m.controls, c, "control", d)
        elif isinstance(d, StabilityDecl):
            if d.map is not None:
                self.get(m.morphisms, d.map, "morphism", d)
            for c in (d.source, d.target):
                if c is None:
                    continue
                ctrl = self.get(m.controls, c, "control", d)
                if len(ctrl.ssub.total.nodes) != 1:
                    raise _BuildError(f"stability needs single-node systems; {c!r} has several nodes", d)
            for e in d.initial + d.epsilons + (d.grid or ()):
                _number(e, m.params)


def build(scenario: Scenario, params: "dict[str, float] | None" = None) -> Model:
    """Build every declaration.

    Args:
        params: overrides for declared parameters.

    Raises:
        ScenarioError: with positioned diagnostics for reference, type and
            dimension errors.
    """
    return _Builder(scenario, params).run()


def load(text: str, params: "dict[str, float] | None" = None) -> Model:
    return build(parse_scenario(text), params)


def bundled_path(name: str):
    from importlib import resources

    return resources.files("hybridnet") / "scenarios" / f"{name}.scn"


def bundled_text(name: str) -> str:
    return bundled_path(name).read_text(encoding="utf-8")


BUNDLED = ("thermostat", "bouncing-ball", "switched-state", "switched-time", "networked-thermostats", "stability-transport")


__all__ = [
    "BUNDLED",
    "Diagnostic",
    "Model",
    "Scenario",
    "ScenarioError",
    "build",
    "bundled_text",
    "load",
    "parse_scenario",
    "serialize",
]
