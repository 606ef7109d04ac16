"""Bit-counting rubrics: graphs, architectures, and prose into a BitLedger.

Every ledger item carries a rubric string beginning with one of the rule
tags below (the remainder of the string shows the arithmetic):

``eq-edges``
    Equation graph edges: ``|E| x (ceil(log2 |V|) + 1)`` with the 1-bit
    argument-order suffix on every edge, or ``|E| x ceil(log2 |V|)`` plus
    one bit per edge into an order-sensitive operator when the config
    says ``order_sensitive_only``.
``eq-legend``
    Equation graph legend: each distinct operator symbol at its codebook
    category width plus each distinct constant at ``constant_bits``.
    Variables cost nothing, and neither do operators that are locally
    defined equations (they are references, not encodings).
``chain-edges``
    Architecture chain edges: one edge per chain element (plus the edges
    contributed by skip/concat/dense combinators), each at
    ``max(1, ceil(log2 pool))`` bits, where the pool is every name an
    edge could point at: all architecture definitions, all locally
    defined equations, and the distinct primitive layers of this unit.
``layer-legend``
    Distinct primitive layers at their category width, plus the join
    operator (``add`` for skip, ``concat`` for concat/dense) at its
    category width when the unit uses one.
``hyperparam-slots``
    Numeric hyperparameter occurrences.  Each slot has a kind inferred
    from the primitive's signature or the target's parameter name
    (filter_size, channels, stride, channel_mult, replication, p,
    generic); a calibration profile may assign per-kind widths,
    otherwise ``hyperparam_bits`` applies.  Symbolic and keyword
    arguments, bindings, and replication by 1 cost nothing.
``english-per-char``
    ``ceil(rate x characters)``; spaces and punctuation count, line
    breaks and indentation do not.  Applied once per item.
``english-per-word``
    ``words x width`` with words split on whitespace.

A section flagged as inherited keeps its items at zero bits with the
original charge recorded as ``uninherited_bits``, so a ledger reports
totals both with and without inheritance.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .codebook import Codebook, ceil_log2, default_codebook
from .dsl import (ArchDefinition, Binding, ChainStatement, DescriptionDoc,
                  Equation, Prose)
from .graphs import (Arg, ArchNode, ArchitectureSpec, Chain, ComputationGraph,
                     ConcatJoin, DenseBlock, NamedRef, PrimitiveLayer,
                     Replicate, SkipAdd)
from .ledger import BitLedger

RUBRIC_TAGS = ("eq-edges", "eq-legend", "chain-edges", "layer-legend",
               "hyperparam-slots", "english-per-char", "english-per-word")

ORDER_SUFFIX_MODES = ("all_edges", "order_sensitive_only")

# Named calibration profiles: slot kind -> bits. Kinds not listed fall
# back to CountConfig.hyperparam_bits. The paper-resnet profile makes the
# 16 forward-pass slots of the ResNet-152 description total 39 bits.
PROFILES: dict[str, dict[str, int]] = {
    "uniform8": {},
    "paper-resnet": {"filter_size": 2, "stride": 1, "channel_mult": 2,
                     "replication": 4, "channels": 4},
}


@dataclass(frozen=True)
class EnglishMode:
    """How free prose is charged: per character or per word."""

    scheme: str
    rate: float = 1.0
    width: int = 10

    def __post_init__(self) -> None:
        if self.scheme not in ("per_char", "per_word"):
            raise ValueError(f"bad english scheme {self.scheme!r}")
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if self.width < 1:
            raise ValueError("width must be at least 1")

    @staticmethod
    def per_char(rate: float = 1.0) -> "EnglishMode":
        return EnglishMode("per_char", rate=rate)

    @staticmethod
    def per_word(width: int = 10) -> "EnglishMode":
        return EnglishMode("per_word", width=width)


@dataclass(frozen=True)
class CountConfig:
    english: EnglishMode = EnglishMode.per_char()
    hyperparam_bits: int = 8
    constant_bits: int = 8
    order_suffix: str = "all_edges"
    profile: str = "uniform8"

    def __post_init__(self) -> None:
        if self.hyperparam_bits < 1 or self.constant_bits < 1:
            raise ValueError("bit widths must be positive")
        if self.order_suffix not in ORDER_SUFFIX_MODES:
            raise ValueError(f"bad order_suffix {self.order_suffix!r}")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown calibration profile {self.profile!r}; "
                             f"have {', '.join(sorted(PROFILES))}")

    def slot_bits(self, kind: str) -> int:
        return PROFILES[self.profile].get(kind, self.hyperparam_bits)


# ---------------------------------------------------------------------------
# English


def count_english(text: str, mode: EnglishMode | None = None) -> BitLedger:
    if mode is None:
        mode = EnglishMode.per_char()
    ledger = BitLedger()
    if mode.scheme == "per_char":
        chars = sum(len(line.strip()) for line in text.splitlines())
        bits = math.ceil(mode.rate * chars)
        ledger.add("english", bits,
                   f"english-per-char: ceil({mode.rate} x {chars})")
    else:
        words = len(text.split())
        ledger.add("english", words * mode.width,
                   f"english-per-word: {words} x {mode.width}")
    return ledger


# ---------------------------------------------------------------------------
# equation graphs


def count_equation(graph: ComputationGraph, cfg: CountConfig | None = None,
                   codebook: Codebook | None = None,
                   local_symbols=()) -> BitLedger:
    """Edge and legend items for one canonicalized equation graph."""
    if cfg is None:
        cfg = CountConfig()
    if codebook is None:
        codebook = default_codebook()
    local = set(local_symbols)
    n_vertices = len(graph.vertices)
    n_edges = len(graph.edges)
    width = ceil_log2(max(n_vertices, 1))

    ledger = BitLedger()
    if cfg.order_suffix == "all_edges":
        ledger.add("edges", n_edges * (width + 1),
                   f"eq-edges: {n_edges} x ({width}+1)")
    else:
        suffixed = 0
        for e in graph.edges:
            dst = graph.vertex(e.dst)
            if dst.kind != "operator" or dst.label in local:
                continue
            entry = codebook.resolve(dst.label)
            if entry is not None and entry.order_sensitive:
                suffixed += 1
        ledger.add("edges", n_edges * width + suffixed,
                   f"eq-edges: {n_edges} x {width} + {suffixed} order")

    op_widths: dict[str, int] = {}
    constants: set[str] = set()
    for v in graph.vertices:
        if v.kind == "operator":
            if v.label in local:
                continue
            entry = codebook.lookup(v.label)
            op_widths.setdefault(entry.symbol, codebook.width(entry.category))
        elif v.kind == "constant":
            constants.add(v.value_text or repr(v.value))
    op_bits = sum(op_widths.values())
    if op_widths and len(set(op_widths.values())) == 1:
        ops_part = f"{len(op_widths)} operators x {next(iter(op_widths.values()))}"
    elif op_widths:
        ops_part = f"{len(op_widths)} operators ({op_bits})"
    else:
        ops_part = "0 operators"
    ledger.add("legend", op_bits + len(constants) * cfg.constant_bits,
               f"eq-legend: {ops_part} + {len(constants)} constants "
               f"x {cfg.constant_bits}")
    return ledger


# ---------------------------------------------------------------------------
# architectures


def _edge_count(node: ArchNode) -> int:
    """Edges of a unit body: chains charge one per element."""
    if isinstance(node, Chain):
        return len(node.elements) + sum(_inner_edges(el)
                                        for el in node.elements)
    return _inner_edges(node)


def _inner_edges(el: ArchNode) -> int:
    if isinstance(el, (PrimitiveLayer, NamedRef)):
        return 0
    if isinstance(el, Replicate):
        return _inner_edges(el.node)
    if isinstance(el, SkipAdd):
        # the bypass contributes its branch edge and the join edge
        return _edge_count(el.body) + 2
    if isinstance(el, ConcatJoin):
        return sum(_edge_count(b) for b in el.branches) + len(el.branches)
    if isinstance(el, DenseBlock):
        return _edge_count(el.body) + 2
    if isinstance(el, Chain):
        return _edge_count(el)
    raise TypeError(f"cannot count {type(el).__name__}")


def _walk(node: ArchNode):
    yield node
    if isinstance(node, Chain):
        for el in node.elements:
            yield from _walk(el)
    elif isinstance(node, Replicate):
        yield from _walk(node.node)
    elif isinstance(node, SkipAdd):
        yield from _walk(node.body)
    elif isinstance(node, ConcatJoin):
        for br in node.branches:
            yield from _walk(br)
    elif isinstance(node, DenseBlock):
        yield from _walk(node.body)


def _distinct_primitives(node: ArchNode,
                         codebook: Codebook) -> dict[str, str]:
    """Canonical symbol -> category, in first-use order."""
    out: dict[str, str] = {}
    for sub in _walk(node):
        if isinstance(sub, PrimitiveLayer):
            entry = codebook.resolve(sub.symbol)
            if entry is not None:
                out.setdefault(entry.symbol, entry.category)
    return out


def _join_ops(node: ArchNode) -> set[str]:
    joins: set[str] = set()
    for sub in _walk(node):
        if isinstance(sub, SkipAdd):
            joins.add("add")
        elif isinstance(sub, (ConcatJoin, DenseBlock)):
            joins.add("concat")
    return joins


def _slot_kind(param: str) -> str:
    p = param.lower()
    if p == "s" or "stride" in p:
        return "stride"
    if p == "f" or "filter" in p:
        return "filter_size"
    if p in ("k", "c") or "channel" in p:
        return "channels"
    if p in ("r", "n") or "count" in p or "repl" in p:
        return "replication"
    if p == "p":
        return "p"
    return "generic"


def _arg_slot(arg: Arg, param: str) -> str | None:
    if arg.form in ("int", "float"):
        return _slot_kind(param) if param else "generic"
    if arg.form == "mult":
        return "channel_mult"
    return None  # bare symbols and keywords are free


def _slots(node: ArchNode, definitions: dict[str, ArchDefinition],
           codebook: Codebook) -> list[str]:
    """Slot kinds charged by a unit body, in occurrence order."""
    out: list[str] = []
    for sub in _walk(node):
        if isinstance(sub, PrimitiveLayer):
            entry = codebook.resolve(sub.symbol)
            sig = entry.hyperparams if entry is not None else ()
            for i, arg in enumerate(sub.args):
                kind = _arg_slot(arg, sig[i] if i < len(sig) else "")
                if kind is not None:
                    out.append(kind)
        elif isinstance(sub, NamedRef):
            target = definitions.get(sub.name)
            params = target.params if target is not None else ()
            for i, arg in enumerate(sub.args):
                kind = _arg_slot(arg, params[i] if i < len(params) else "")
                if kind is not None:
                    out.append(kind)
        elif isinstance(sub, Replicate):
            if sub.count != 1:
                out.append("replication")
        elif isinstance(sub, DenseBlock):
            kind = _arg_slot(sub.count, "replication")
            if kind is not None:
                out.append(kind)
    return out


def count_architecture(spec: ArchitectureSpec,
                       cfg: CountConfig | None = None,
                       codebook: Codebook | None = None,
                       equation_names=(),
                       units=None) -> BitLedger:
    """Per-unit edge, legend, and hyperparameter items.

    A unit is each architecture definition plus, when present, the
    forward pass (labeled ``forward``).  ``equation_names`` lists
    locally defined equations, which enlarge the name pool that chain
    edges index into.  ``units`` restricts which units are emitted.
    """
    if cfg is None:
        cfg = CountConfig()
    if codebook is None:
        codebook = default_codebook()
    all_units: list[tuple[str, ArchNode]] = [
        (name, d.body) for name, d in spec.definitions.items()]
    if spec.forward_pass is not None:
        all_units.append(("forward", spec.forward_pass))
    if units is not None:
        wanted = list(units)
        missing = [u for u in wanted if u not in dict(all_units)]
        if missing:
            raise KeyError(f"no such unit: {', '.join(missing)}")
        all_units = [(n, b) for n, b in all_units if n in wanted]

    pool_base = len(spec.definitions) + len(set(equation_names))
    ledger = BitLedger()
    for name, body in all_units:
        prims = _distinct_primitives(body, codebook)
        pool = pool_base + len(prims)
        width = max(1, ceil_log2(max(pool, 1)))
        edges = _edge_count(body)
        ledger.add(f"{name} edges", edges * width,
                   f"chain-edges: {edges} x {width} (pool {pool})")

        prim_bits = sum(codebook.width(cat) for cat in prims.values())
        widths = {codebook.width(cat) for cat in prims.values()}
        if prims and len(widths) == 1:
            legend_rubric = f"layer-legend: {len(prims)} layer types x {widths.pop()}"
        elif prims:
            legend_rubric = f"layer-legend: {len(prims)} layer types ({prim_bits})"
        else:
            legend_rubric = "layer-legend: 0 layer types"
        join_bits = 0
        for join in sorted(_join_ops(body)):
            entry = codebook.lookup(join)
            join_bits += codebook.width(entry.category)
            legend_rubric += (f" + {join} join "
                              f"x {codebook.width(entry.category)}")
        ledger.add(f"{name} legend", prim_bits + join_bits, legend_rubric)

        slots = _slots(body, spec.definitions, codebook)
        if slots:
            bits = sum(cfg.slot_bits(kind) for kind in slots)
            breakdown = ", ".join(f"{kind} x{n}" for kind, n
                                  in sorted(Counter(slots).items()))
            ledger.add(f"{name} hyperparameters", bits,
                       f"hyperparam-slots: {len(slots)} slots ({breakdown})")
    return ledger


# ---------------------------------------------------------------------------
# whole documents


def count_description(doc: DescriptionDoc, cfg: CountConfig | None = None,
                      codebook: Codebook | None = None) -> BitLedger:
    """Sum of section ledgers, in document order.

    Per section: equations and architecture units in item order, then a
    single english item covering the section's prose.  Bindings charge
    nothing.  Inherited sections keep their items at zero bits with the
    original charge in ``uninherited_bits``.
    """
    if cfg is None:
        cfg = CountConfig()
    if codebook is None:
        codebook = default_codebook()
    definitions = doc.definitions()
    bindings = doc.bindings()
    equation_names = tuple(doc.equation_names())

    ledger = BitLedger()
    earlier_equations: list[str] = []
    for section in doc.sections:
        sec = BitLedger()
        prose: list[str] = []
        for item in section.items:
            if isinstance(item, Prose):
                prose.append(item.text)
            elif isinstance(item, Equation):
                sec.extend(count_equation(item.graph, cfg, codebook,
                                          local_symbols=earlier_equations),
                           prefix=f"{item.name} ")
                earlier_equations.append(item.name)
            elif isinstance(item, ArchDefinition):
                spec = ArchitectureSpec(definitions, bindings, None)
                sec.extend(count_architecture(spec, cfg, codebook,
                                              equation_names=equation_names,
                                              units=[item.name]))
            elif isinstance(item, ChainStatement):
                spec = ArchitectureSpec(definitions, bindings, item.node)
                sec.extend(count_architecture(spec, cfg, codebook,
                                              equation_names=equation_names,
                                              units=["forward"]))
            elif isinstance(item, Binding):
                pass  # establishing a symbol is free; uses are charged
        if prose:
            sec.extend(count_english("\n".join(prose), cfg.english))
        if section.inherited_from_baseline:
            zeroed = BitLedger()
            for it in sec.items:
                zeroed.add(it.label, 0, it.rubric + "; inherited",
                           uninherited_bits=it.bits)
            sec = zeroed
        ledger.extend(sec, prefix=f"{section.name}: ")
    return ledger
