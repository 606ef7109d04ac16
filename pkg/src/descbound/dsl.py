"""Parser and canonical emitter for ``.rvw`` model descriptions.

A description file is line-oriented (full EBNF in docs/format.md):

    model ResNet-152
    baseline AlexNet

    section Batch-Normalization
      BN(x) = b + g * (x - mu) / sqrt(sigma2 + 0.01)

    section Architecture
      Layer(f, k, s): BN() -> ReLU() -> Conv(f, k, s)

    section Training [english] @inherit(AlexNet)
      SGD(batchsize=256, weight-decay=1e-4, momentum=0.9)

Content lines inside a section are classified as architecture definition
(``Name(params): chain``), equation (``Name(params) = expr``), numeric
binding (``name = number``), bare chain (contains ``->`` outside
parentheses), or prose, in that order.  A ``[english]`` marker on the
section header forces every content line to prose.  ``#`` starts a
comment; a content line ending in ``->`` continues on the next line.

Equations are lowered to ComputationGraph (leaves shared by name or by
constant spelling, an output vertex appended, then canonicalized), chains
to the combinator tree of :mod:`descbound.graphs`.  Errors carry a
``code`` of ``syntax_error`` (with line/column), ``unknown_symbol``
(with suggestions), or ``forward_reference``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

from .codebook import Codebook, UnknownSymbolError, default_codebook
from .graphs import (Arg, ArchDefinition, ArchNode, Chain, ComputationGraph,
                     ConcatJoin, DenseBlock, Edge, NamedRef, PrimitiveLayer,
                     Replicate, SkipAdd, Vertex, canonicalize, validate)

# Greek input is normalized to the ASCII spellings used throughout the
# format; descriptions are written in ASCII but pasted text happens.
GREEK_ALIASES = {
    "μ": "mu", "σ": "sigma", "σ2": "sigma2", "α": "alpha", "β": "beta",
    "γ": "gamma", "δ": "delta", "ε": "eps", "λ": "lambda", "τ": "tau",
}

_BINARY_SYMBOLS = {"+": "add", "-": "subtract", "*": "multiply",
                   "/": "divide", "^": "power"}
_INFIX_OF = {v: k for k, v in _BINARY_SYMBOLS.items()}
# precedence for the canonical emitter; unary calls render as name(args)
_PRECEDENCE = {"add": 1, "subtract": 1, "multiply": 2, "divide": 2,
               "power": 3}

COMBINATORS = ("skip", "dense", "concat")


class DslError(ValueError):
    """Raised on the first problem found while parsing.

    ``code`` is one of ``syntax_error``, ``unknown_symbol``,
    ``forward_reference``; ``line``/``column`` are 1-based when known.
    """

    def __init__(self, code: str, message: str, line: int | None = None,
                 column: int | None = None,
                 suggestions: list[str] | None = None):
        self.code = code
        self.line = line
        self.column = column
        self.suggestions = suggestions or []
        where = ""
        if line is not None:
            where = f" (line {line}" + (
                f", column {column})" if column is not None else ")")
        hint = ""
        if self.suggestions:
            hint = "; did you mean: " + ", ".join(self.suggestions)
        super().__init__(f"{code}: {message}{where}{hint}")


# ---------------------------------------------------------------------------
# document model


@dataclass(frozen=True)
class Equation:
    """A named formula lowered to a canonicalized computation graph."""

    name: str
    params: tuple[str, ...]
    graph: ComputationGraph


@dataclass(frozen=True)
class Binding:
    """``name = number``; establishes a symbol, charges no bits."""

    name: str
    value: Arg


@dataclass(frozen=True)
class ChainStatement:
    """A bare chain line; the document's last one is the forward pass."""

    node: ArchNode


@dataclass(frozen=True)
class Prose:
    text: str


SectionItem = Union[Equation, Binding, ChainStatement, Prose, ArchDefinition]

_SECTION_KINDS = ("english", "equation", "architecture", "mixed")


@dataclass
class Section:
    name: str
    items: list[SectionItem] = field(default_factory=list)
    declared_english: bool = False
    inherited_from_baseline: bool = False
    inherit_from: str | None = None
    raw_text: str = field(default="", compare=False)

    @property
    def kind(self) -> str:
        if self.declared_english:
            return "english"
        has_eq = any(isinstance(i, Equation) for i in self.items)
        has_arch = any(isinstance(i, (ArchDefinition, ChainStatement))
                       for i in self.items)
        if has_eq and has_arch:
            return "mixed"
        if has_eq:
            return "equation"
        if has_arch:
            return "architecture"
        return "english"


@dataclass
class DescriptionDoc:
    model_name: str = ""
    sections: list[Section] = field(default_factory=list)
    baseline_ref: str | None = None

    def equation_names(self) -> list[str]:
        return [item.name for section in self.sections
                for item in section.items if isinstance(item, Equation)]

    def definitions(self) -> dict[str, ArchDefinition]:
        return {item.name: item for section in self.sections
                for item in section.items
                if isinstance(item, ArchDefinition)}

    def bindings(self) -> dict[str, Arg]:
        return {item.name: item.value for section in self.sections
                for item in section.items if isinstance(item, Binding)}

    def forward_pass(self) -> ArchNode | None:
        node = None
        for section in self.sections:
            for item in section.items:
                if isinstance(item, ChainStatement):
                    node = item.node
        return node


# ---------------------------------------------------------------------------
# tokenizer


@dataclass(frozen=True)
class _Token:
    kind: str   # num | name | arrow | sym | eof
    text: str
    column: int


_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[^\W\d]\w*)"
    r"|(?P<arrow>->)"
    r"|(?P<sym>[-+*/^(),:=])"
    r"|(?P<ws>[ \t]+)")


def _tokenize(text: str, line: int, offset: int = 0) -> list[_Token]:
    """Tokenize one statement; ``offset`` shifts columns to line coordinates."""
    out: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslError("syntax_error",
                           f"unexpected character {text[pos]!r}",
                           line, pos + 1 + offset)
        kind = m.lastgroup or ""
        if kind != "ws":
            word = m.group()
            if kind == "name":
                word = GREEK_ALIASES.get(word, word)
            out.append(_Token(kind, word, pos + 1 + offset))
        pos = m.end()
    out.append(_Token("eof", "", len(text) + 1 + offset))
    return out


# ---------------------------------------------------------------------------
# line classification

_HEADER_RE = re.compile(r"^\s*(model|baseline|section)\b(.*)$")
_NAME = r"[^\W\d][\w-]*"
_MODEL_REST_RE = re.compile(rf"^\s+(?P<name>{_NAME})\s*$")
_SECTION_REST_RE = re.compile(
    rf"^\s+(?P<name>{_NAME})"
    r"(?:\s+\[(?P<kind>[a-z]+)\])?"
    rf"(?:\s+@inherit\(\s*(?P<base>{_NAME})\s*\))?\s*$")
_DEF_RE = re.compile(r"^\s*([^\W\d]\w*)\s*\(([^()=:]*)\)\s*:\s*(\S.*)$")
_EQ_RE = re.compile(r"^\s*([^\W\d]\w*)\s*\(([^()=]*)\)\s*=\s*(\S.*)$")
_BIND_RE = re.compile(
    r"^\s*([^\W\d]\w*)\s*=\s*((?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)\s*$")


def _has_toplevel_arrow(text: str) -> bool:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "-" and depth == 0 and text[i + 1:i + 2] == ">":
            return True
    return False


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def _logical_lines(source: str) -> Iterator[tuple[int, str, str]]:
    """Yield (first line number, merged text, raw text) per logical line.

    Comments are stripped first; a line whose stripped text ends in
    ``->`` is merged with the following line(s).
    """
    raw_lines = source.splitlines()
    i = 0
    while i < len(raw_lines):
        start = i
        text = _strip_comment(raw_lines[i]).rstrip()
        i += 1
        while text.rstrip().endswith("->") and i < len(raw_lines):
            text = text.rstrip() + " " + _strip_comment(raw_lines[i]).strip()
            i += 1
        raw = "\n".join(raw_lines[start:i])
        yield start + 1, text, raw


def _split_params(params_text: str, line: int) -> tuple[str, ...]:
    text = params_text.strip()
    if not text:
        return ()
    out = []
    for piece in text.split(","):
        name = piece.strip()
        if not re.fullmatch(r"[^\W\d]\w*", name):
            raise DslError("syntax_error",
                           f"bad parameter name {name!r}", line)
        out.append(GREEK_ALIASES.get(name, name))
    if len(set(out)) != len(out):
        raise DslError("syntax_error", "repeated parameter name", line)
    return tuple(out)


# ---------------------------------------------------------------------------
# expression / chain parser over one logical line


class _LineParser:
    def __init__(self, ctx: "_ParseContext", text: str, line: int,
                 params: tuple[str, ...] = (), offset: int = 0):
        self.ctx = ctx
        self.line = line
        self.params = params
        self.toks = _tokenize(text, line, offset)
        self.i = 0

    def peek(self, ahead: int = 0) -> _Token:
        j = min(self.i + ahead, len(self.toks) - 1)
        return self.toks[j]

    def advance(self) -> _Token:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.advance()
        if tok.text != text:
            found = repr(tok.text) if tok.text else "end of line"
            self.fail(f"expected {text!r}, found {found}", tok)
        return tok

    def fail(self, message: str, tok: _Token | None = None) -> None:
        tok = tok or self.peek()
        raise DslError("syntax_error", message, self.line, tok.column)

    def at_end(self) -> bool:
        return self.peek().kind == "eof"

    def require_end(self) -> None:
        if not self.at_end():
            self.fail(f"unexpected {self.peek().text!r} after expression")

    # -- expressions --------------------------------------------------

    def parse_expr(self):
        node = self.parse_term()
        while self.peek().text in ("+", "-"):
            op = self.advance().text
            node = ("bin", _BINARY_SYMBOLS[op], node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_unary()
        while self.peek().text in ("*", "/"):
            op = self.advance().text
            node = ("bin", _BINARY_SYMBOLS[op], node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.peek().text == "-":
            self.advance()
            # unary minus lowers to subtraction from zero
            return ("bin", "subtract", ("const", "0"), self.parse_unary())
        return self.parse_power()

    def parse_power(self):
        node = self.parse_atom()
        if self.peek().text == "^":
            self.advance()
            node = ("bin", "power", node, self.parse_unary())
        return node

    def parse_atom(self):
        tok = self.advance()
        if tok.kind == "num":
            return ("const", tok.text)
        if tok.kind == "name":
            if self.peek().text == "(":
                self.advance()
                args = []
                if self.peek().text != ")":
                    args.append(self.parse_expr())
                    while self.peek().text == ",":
                        self.advance()
                        args.append(self.parse_expr())
                self.expect(")")
                return ("call", tok.text, tuple(args), tok.column)
            return ("var", tok.text)
        if tok.text == "(":
            node = self.parse_expr()
            self.expect(")")
            return node
        self.fail("expected a number, name, or '('", tok)

    # -- chains -------------------------------------------------------

    def parse_chain(self) -> ArchNode:
        elements = [self.parse_element()]
        while self.peek().kind == "arrow":
            self.advance()
            elements.append(self.parse_element())
        if len(elements) == 1:
            return elements[0]
        return Chain(tuple(elements))

    def parse_element(self) -> ArchNode:
        tok = self.peek()
        if tok.kind != "name":
            self.fail("expected a layer or block name", tok)
        if tok.text in COMBINATORS and self.peek(1).text == "(":
            node = self.parse_combinator()
        else:
            node = self.parse_callable()
        # `x N` replication binds tighter than `->`
        if (self.peek().text == "x" and self.peek().kind == "name"
                and self.peek(1).kind == "num"):
            self.advance()
            count_tok = self.advance()
            try:
                count = int(count_tok.text)
            except ValueError:
                count = -1
            if count < 1:
                self.fail("replication count must be a positive integer",
                          count_tok)
            node = Replicate(node, count)
        return node

    def parse_combinator(self) -> ArchNode:
        name = self.advance().text
        self.expect("(")
        if name == "skip":
            body = self.parse_chain()
            self.expect(")")
            return SkipAdd(body)
        if name == "dense":
            count = self.parse_arg()
            self.expect(",")
            body = self.parse_chain()
            self.expect(")")
            return DenseBlock(count, body)
        branches = [self.parse_chain()]
        while self.peek().text == ",":
            self.advance()
            branches.append(self.parse_chain())
        self.expect(")")
        if len(branches) < 2:
            self.fail("concat needs at least two branches")
        return ConcatJoin(tuple(branches))

    def parse_callable(self) -> ArchNode:
        tok = self.advance()
        args: tuple[Arg, ...] = ()
        if self.peek().text == "(":
            self.advance()
            arglist = []
            if self.peek().text != ")":
                arglist.append(self.parse_arg())
                while self.peek().text == ",":
                    self.advance()
                    arglist.append(self.parse_arg())
            self.expect(")")
            args = tuple(arglist)
        return self.ctx.classify_callable(tok.text, args, self.line,
                                          tok.column)

    def parse_arg(self) -> Arg:
        tok = self.advance()
        if tok.kind == "num":
            nxt = self.peek()
            if (nxt.kind == "name"
                    and nxt.column == tok.column + len(tok.text)):
                # 2k, 4k: integer or decimal coefficient glued to a symbol
                self.advance()
                coeff = Fraction(tok.text)
                if self.peek().text == "/" and self.peek(1).kind == "num":
                    self.advance()
                    coeff /= self._int_token()
                return Arg.mult(coeff, nxt.text)
            if "." in tok.text or "e" in tok.text or "E" in tok.text:
                return Arg.real(float(tok.text), tok.text)
            return Arg.integer(int(tok.text))
        if tok.kind == "name":
            if self.peek().text == "/" and self.peek(1).kind == "num":
                self.advance()
                return Arg.mult(Fraction(1, self._int_token()), tok.text)
            if tok.text in self.params or tok.text in self.ctx.bindings:
                return Arg.sym(tok.text)
            return Arg.keyword(tok.text)
        self.fail("expected a hyperparameter value", tok)

    def _int_token(self) -> int:
        tok = self.advance()
        try:
            return int(tok.text)
        except ValueError:
            self.fail("expected an integer", tok)


# ---------------------------------------------------------------------------
# equation lowering


class _GraphBuilder:
    """Accumulates vertices and edges; leaves are interned, operators not."""

    def __init__(self) -> None:
        self.vertices: list[Vertex] = []
        self.edges: list[Edge] = []
        self._interned: dict[tuple[str, str], int] = {}

    def variable(self, name: str) -> int:
        key = ("var", name)
        if key not in self._interned:
            self._interned[key] = self._add(
                Vertex(len(self.vertices), "variable", name))
        return self._interned[key]

    def constant(self, text: str) -> int:
        key = ("const", text)
        if key not in self._interned:
            self._interned[key] = self._add(
                Vertex(len(self.vertices), "constant", text,
                       value=float(text), value_text=text))
        return self._interned[key]

    def operator(self, symbol: str, args: list[int]) -> int:
        index = self._add(Vertex(len(self.vertices), "operator", symbol))
        for position, src in enumerate(args, start=1):
            self.edges.append(Edge(src, index, position))
        return index

    def _add(self, vertex: Vertex) -> int:
        self.vertices.append(vertex)
        return vertex.index


def _lower_equation(ctx: "_ParseContext", name: str, params: tuple[str, ...],
                    ast, line: int) -> ComputationGraph:
    builder = _GraphBuilder()
    builder.variable(params[0])  # the input; interned first so it is index 0

    def walk(node) -> int:
        tag = node[0]
        if tag == "const":
            return builder.constant(node[1])
        if tag == "var":
            return builder.variable(node[1])
        if tag == "bin":
            _, symbol, left, right = node
            return builder.operator(symbol, [walk(left), walk(right)])
        _, symbol, args, column = node
        resolved = ctx.resolve_operator(symbol, line, column)
        return builder.operator(resolved, [walk(a) for a in args])

    root = walk(ast)
    output = builder._add(
        Vertex(len(builder.vertices), "variable", "output"))
    builder.edges.append(Edge(root, output, 1))
    graph = ComputationGraph(tuple(builder.vertices), tuple(builder.edges),
                             input_vertex=0, output_vertex=output)
    local = ctx.equation_names_so_far()
    problems = validate(graph, ctx.codebook, local)
    if problems:
        raise DslError("syntax_error",
                       f"equation {name} is not a valid graph: "
                       f"{problems[0].message}", line)
    return canonicalize(graph, ctx.codebook, local)


# ---------------------------------------------------------------------------
# parse


class _ParseContext:
    def __init__(self, codebook: Codebook, all_names: set[str]):
        self.codebook = codebook
        self.all_names = all_names       # every name defined anywhere in doc
        self.known: dict[str, object] = {}   # name -> Equation|ArchDefinition
        self.bindings: dict[str, Arg] = {}

    def equation_names_so_far(self) -> list[str]:
        return [n for n, item in self.known.items()
                if isinstance(item, Equation)]

    def _unknown(self, name: str, line: int, column: int) -> DslError:
        if name in self.all_names:
            return DslError("forward_reference",
                            f"{name!r} is used before its definition",
                            line, column)
        try:
            self.codebook.lookup(name)
        except UnknownSymbolError as exc:
            return DslError("unknown_symbol", f"unknown symbol {name!r}",
                            line, column, suggestions=exc.suggestions)
        raise AssertionError("unreachable")  # pragma: no cover

    def resolve_operator(self, symbol: str, line: int, column: int) -> str:
        entry = self.codebook.resolve(symbol)
        if entry is not None:
            return entry.symbol
        if isinstance(self.known.get(symbol), Equation):
            return symbol
        raise self._unknown(symbol, line, column)

    def classify_callable(self, name: str, args: tuple[Arg, ...],
                          line: int, column: int) -> ArchNode:
        entry = self.codebook.resolve(name)
        if entry is not None:
            if len(args) > len(entry.hyperparams):
                raise DslError(
                    "syntax_error",
                    f"{entry.symbol} takes at most {len(entry.hyperparams)} "
                    f"arguments, got {len(args)}", line, column)
            return PrimitiveLayer(entry.symbol, args)
        known = self.known.get(name)
        if known is None:
            raise self._unknown(name, line, column)
        if isinstance(known, ArchDefinition) and len(args) > len(known.params):
            # fewer arguments than parameters is allowed: the companion
            # descriptions omit trailing arguments (Block(2k))
            raise DslError(
                "syntax_error",
                f"{name} takes at most {len(known.params)} arguments, "
                f"got {len(args)}", line, column)
        return NamedRef(name, args)

    def define(self, name: str, item, line: int) -> None:
        if name in self.known:
            raise DslError("syntax_error",
                           f"{name!r} is defined twice", line)
        self.known[name] = item


def _collect_names(source: str) -> set[str]:
    """Pass one: names of every equation and architecture definition."""
    names: set[str] = set()
    in_english = False
    for _, text, _ in _logical_lines(source):
        header = _HEADER_RE.match(text)
        if header:
            if header.group(1) == "section":
                rest = _SECTION_REST_RE.match(header.group(2))
                in_english = bool(rest and rest.group("kind") == "english")
            continue
        if in_english or not text.strip():
            continue
        m = _DEF_RE.match(text) or _EQ_RE.match(text)
        if m and not _BIND_RE.match(text):
            names.add(m.group(1))
    return names


def parse(source: str, codebook: Codebook | None = None) -> DescriptionDoc:
    """Parse ``.rvw`` source into a DescriptionDoc.

    Raises DslError on the first problem; see the module docstring for
    the error codes.
    """
    if codebook is None:
        codebook = default_codebook()
    ctx = _ParseContext(codebook, _collect_names(source))
    doc = DescriptionDoc()
    section: Section | None = None
    seen_sections: set[str] = set()
    raw_parts: list[str] = []

    def flush_raw() -> None:
        if section is not None:
            section.raw_text = "\n".join(raw_parts)
        raw_parts.clear()

    for line_no, text, raw in _logical_lines(source):
        stripped = text.strip()
        header = _HEADER_RE.match(text)
        if header:
            keyword, rest = header.group(1), header.group(2)
            if keyword == "section":
                m = _SECTION_REST_RE.match(rest)
                if m is None:
                    raise DslError("syntax_error",
                                   "bad section header", line_no)
                name = m.group("name")
                kind = m.group("kind")
                base = m.group("base")
                if kind is not None and kind != "english":
                    raise DslError(
                        "syntax_error",
                        f"only [english] may be declared; section kind "
                        f"{kind!r} is inferred from content", line_no)
                if name in seen_sections:
                    raise DslError("syntax_error",
                                   f"duplicate section {name!r}", line_no)
                if base is not None and base != doc.baseline_ref:
                    raise DslError(
                        "syntax_error",
                        f"@inherit({base}) does not match the declared "
                        f"baseline {doc.baseline_ref!r}", line_no)
                flush_raw()
                section = Section(name=name,
                                  declared_english=(kind == "english"),
                                  inherited_from_baseline=base is not None,
                                  inherit_from=base)
                seen_sections.add(name)
                doc.sections.append(section)
                continue
            # model / baseline headers live above the first section
            m = _MODEL_REST_RE.match(rest)
            if m is None:
                raise DslError("syntax_error",
                               f"bad {keyword} line", line_no)
            if section is not None:
                raise DslError("syntax_error",
                               f"{keyword} must appear before the first "
                               f"section", line_no)
            if keyword == "model":
                if doc.model_name:
                    raise DslError("syntax_error",
                                   "model is declared twice", line_no)
                doc.model_name = m.group("name")
            else:
                if doc.baseline_ref is not None:
                    raise DslError("syntax_error",
                                   "baseline is declared twice", line_no)
                doc.baseline_ref = m.group("name")
            continue

        if not stripped:
            continue
        if section is None:
            raise DslError("syntax_error",
                           "content before the first section", line_no)
        raw_parts.append(raw)

        if section.declared_english:
            section.items.append(Prose(stripped))
            continue

        m = _DEF_RE.match(text)
        if m:
            name, params_text, body_text = m.groups()
            params = _split_params(params_text, line_no)
            parser = _LineParser(ctx, body_text, line_no, params,
                                 offset=m.start(3))
            body = parser.parse_chain()
            parser.require_end()
            definition = ArchDefinition(name, params, body)
            ctx.define(name, definition, line_no)
            section.items.append(definition)
            continue
        if not _BIND_RE.match(text):
            m = _EQ_RE.match(text)
            if m:
                name, params_text, expr_text = m.groups()
                params = _split_params(params_text, line_no)
                if not params:
                    raise DslError("syntax_error",
                                   f"equation {name} needs at least one "
                                   f"parameter", line_no)
                parser = _LineParser(ctx, expr_text, line_no, params,
                                     offset=m.start(3))
                ast = parser.parse_expr()
                parser.require_end()
                equation = Equation(name, params,
                                    _lower_equation(ctx, name, params, ast,
                                                    line_no))
                ctx.define(name, equation, line_no)
                section.items.append(equation)
                continue
        m = _BIND_RE.match(text)
        if m:
            name, value_text = m.groups()
            if "." in value_text or "e" in value_text or "E" in value_text:
                value = Arg.real(float(value_text), value_text)
            else:
                value = Arg.integer(int(value_text))
            ctx.bindings[name] = value
            section.items.append(Binding(name, value))
            continue
        if _has_toplevel_arrow(text):
            parser = _LineParser(ctx, text, line_no)
            node = parser.parse_chain()
            parser.require_end()
            section.items.append(ChainStatement(node))
            continue
        section.items.append(Prose(stripped))

    flush_raw()
    return doc


def parse_file(path, codebook: Codebook | None = None) -> DescriptionDoc:
    with open(path, encoding="utf-8") as handle:
        return parse(handle.read(), codebook)


# ---------------------------------------------------------------------------
# canonical emission


def _render_expr(graph: ComputationGraph) -> str:
    by_index = {v.index: v for v in graph.vertices}
    in_edges: dict[int, list[Edge]] = {v.index: [] for v in graph.vertices}
    for e in graph.edges:
        in_edges[e.dst].append(e)

    def render(index: int, parent_prec: int, tie_parens: bool) -> str:
        vertex = by_index[index]
        if vertex.kind == "constant":
            return vertex.value_text or repr(vertex.value)
        if vertex.kind == "variable":
            return vertex.label
        args = sorted(in_edges[index], key=lambda e: e.arg_position)
        symbol = vertex.label
        prec = _PRECEDENCE.get(symbol)
        if prec is None or len(args) != 2:
            inner = ", ".join(render(e.src, 0, False) for e in args)
            return f"{symbol}({inner})"
        # power is right-associative, the rest left-associative; the
        # associated side may drop parentheses on an equal-precedence tie
        right_assoc = symbol == "power"
        left = render(args[0].src, prec, right_assoc)
        right = render(args[1].src, prec, not right_assoc)
        text = f"{left} {_INFIX_OF[symbol]} {right}"
        if prec < parent_prec or (prec == parent_prec and tie_parens):
            return f"({text})"
        return text

    root_edges = in_edges[graph.output_vertex]
    if not root_edges:
        return by_index[graph.input_vertex].label
    return render(root_edges[0].src, 0, False)


def _render_arg(arg: Arg) -> str:
    return arg.render()


def _render_node(node: ArchNode, in_chain: bool = False) -> str:
    if isinstance(node, PrimitiveLayer) or isinstance(node, NamedRef):
        name = node.symbol if isinstance(node, PrimitiveLayer) else node.name
        if node.args:
            return f"{name}({', '.join(_render_arg(a) for a in node.args)})"
        return name
    if isinstance(node, Chain):
        return " -> ".join(_render_node(el, in_chain=True)
                           for el in node.elements)
    if isinstance(node, Replicate):
        return f"{_render_node(node.node, in_chain)} x {node.count}"
    if isinstance(node, SkipAdd):
        return f"skip({_render_node(node.body)})"
    if isinstance(node, ConcatJoin):
        inner = ", ".join(_render_node(b) for b in node.branches)
        return f"concat({inner})"
    if isinstance(node, DenseBlock):
        return f"dense({_render_arg(node.count)}, {_render_node(node.body)})"
    raise TypeError(f"cannot render {type(node).__name__}")


def roundtrip(doc: DescriptionDoc) -> str:
    """Emit canonical source; parse(roundtrip(doc)) is structurally doc."""
    lines: list[str] = []
    if doc.model_name:
        lines.append(f"model {doc.model_name}")
    if doc.baseline_ref is not None:
        lines.append(f"baseline {doc.baseline_ref}")
    for section in doc.sections:
        if lines:
            lines.append("")
        header = f"section {section.name}"
        if section.declared_english:
            header += " [english]"
        if section.inherited_from_baseline:
            header += f" @inherit({section.inherit_from})"
        lines.append(header)
        for item in section.items:
            if isinstance(item, Equation):
                params = ", ".join(item.params)
                lines.append(f"  {item.name}({params}) = "
                             f"{_render_expr(item.graph)}")
            elif isinstance(item, ArchDefinition):
                params = ", ".join(item.params)
                lines.append(f"  {item.name}({params}): "
                             f"{_render_node(item.body)}")
            elif isinstance(item, Binding):
                lines.append(f"  {item.name} = {item.value.render()}")
            elif isinstance(item, ChainStatement):
                lines.append(f"  {_render_node(item.node)}")
            else:
                lines.append(f"  {item.text}")
    return "\n".join(lines) + ("\n" if lines else "")
