"""Domain types for equation graphs and recursive architecture specs.

An equation is held as a directed acyclic computation graph: squares
(variables, constants) and circles (operators) joined by argument edges.
An architecture is held as a small combinator tree: primitive layers and
named references composed by chains, replication, skip joins, concat
joins, and dense blocks.

Validation returns violations as data; only ``canonicalize`` raises, and
only when handed an invalid graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

from .codebook import Codebook, default_codebook

VERTEX_KINDS = ("variable", "constant", "operator")


@dataclass(frozen=True)
class Vertex:
    index: int
    kind: str
    label: str                      # variable name or operator symbol
    value: float | None = None      # constants only
    value_text: str | None = None   # exact source spelling of the constant

    def __post_init__(self) -> None:
        if self.kind not in VERTEX_KINDS:
            raise ValueError(f"bad vertex kind {self.kind!r}")
        if self.kind == "constant" and self.value is None:
            raise ValueError(f"constant vertex {self.index} has no value")


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    arg_position: int = 1


@dataclass(frozen=True)
class ComputationGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    input_vertex: int
    output_vertex: int

    def vertex(self, index: int) -> Vertex:
        v = self.vertices[index]
        if v.index != index:
            # vertices may be listed out of order; fall back to a scan
            for u in self.vertices:
                if u.index == index:
                    return u
            raise KeyError(index)
        return v

    def in_edges(self, index: int) -> list[Edge]:
        return [e for e in self.edges if e.dst == index]

    def out_edges(self, index: int) -> list[Edge]:
        return [e for e in self.edges if e.src == index]

    def to_json_dict(self) -> dict:
        verts = []
        for v in sorted(self.vertices, key=lambda v: v.index):
            d: dict = {"index": v.index, "kind": v.kind, "label": v.label}
            if v.kind == "constant":
                d["value"] = v.value
                d["value_text"] = v.value_text
            verts.append(d)
        return {
            "schema": "descbound.graph/1",
            "vertices": verts,
            "edges": [{"src": e.src, "dst": e.dst, "arg": e.arg_position}
                      for e in self.edges],
            "input": self.input_vertex,
            "output": self.output_vertex,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ComputationGraph":
        vertices = tuple(
            Vertex(index=v["index"], kind=v["kind"], label=v["label"],
                   value=v.get("value"), value_text=v.get("value_text"))
            for v in data["vertices"])
        edges = tuple(
            Edge(src=e["src"], dst=e["dst"], arg_position=e.get("arg", 1))
            for e in data["edges"])
        return cls(vertices=vertices, edges=edges,
                   input_vertex=data["input"], output_vertex=data["output"])


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    where: tuple[int, ...] = ()


def validate(graph: ComputationGraph, codebook: Codebook | None = None,
             local_symbols: Iterable[str] = ()) -> list[Violation]:
    """Structural invariant check; empty list means the graph is valid.

    ``local_symbols`` names operators defined outside the codebook (other
    equations in the same document).
    """
    if codebook is None:
        codebook = default_codebook()
    local = set(local_symbols)
    out: list[Violation] = []

    n = len(graph.vertices)
    indices = sorted(v.index for v in graph.vertices)
    if indices != list(range(n)):
        out.append(Violation("bad_index_set",
                             f"vertex indices are not 0..{n - 1}"))
        return out  # everything below assumes a sane index set

    by_index = {v.index: v for v in graph.vertices}
    for e in graph.edges:
        if e.src not in by_index or e.dst not in by_index:
            out.append(Violation("dangling_edge",
                                 f"edge {e.src}->{e.dst} references a "
                                 f"missing vertex", (e.src, e.dst)))
    if any(v.code == "dangling_edge" for v in out):
        return out

    if graph.input_vertex != 0:
        out.append(Violation("input_not_lowest",
                             f"input vertex is {graph.input_vertex}, "
                             f"expected index 0", (graph.input_vertex,)))
    if graph.output_vertex != n - 1:
        out.append(Violation("output_not_highest",
                             f"output vertex is {graph.output_vertex}, "
                             f"expected index {n - 1}",
                             (graph.output_vertex,)))

    in_edges: dict[int, list[Edge]] = {v.index: [] for v in graph.vertices}
    out_deg = {v.index: 0 for v in graph.vertices}
    for e in graph.edges:
        in_edges[e.dst].append(e)
        out_deg[e.src] += 1

    if in_edges[graph.input_vertex]:
        out.append(Violation("input_has_in_edges",
                             "input vertex has incoming edges",
                             (graph.input_vertex,)))
    if out_deg[graph.output_vertex]:
        out.append(Violation("output_has_out_edges",
                             "output vertex has outgoing edges",
                             (graph.output_vertex,)))

    # cycle check: Kahn peeling
    remaining = dict(out_deg)
    indeg = {i: len(es) for i, es in in_edges.items()}
    queue = [i for i, d in indeg.items() if d == 0]
    seen = 0
    succ: dict[int, list[int]] = {v.index: [] for v in graph.vertices}
    for e in graph.edges:
        succ[e.src].append(e.dst)
    while queue:
        i = queue.pop()
        seen += 1
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                queue.append(j)
    if seen != n:
        stuck = tuple(sorted(i for i, d in indeg.items() if d > 0))
        out.append(Violation("cycle_detected",
                             f"cycle through vertices {list(stuck)}", stuck))
        return out

    for v in graph.vertices:
        es = in_edges[v.index]
        if v.kind == "operator":
            entry = codebook.resolve(v.label)
            if entry is None and v.label not in local:
                out.append(Violation("unknown_symbol",
                                     f"operator {v.label!r} is not in the "
                                     f"codebook or locally defined",
                                     (v.index,)))
                continue
            arity = entry.arity if entry is not None else None
            if arity is not None and len(es) != arity:
                out.append(Violation("arity_mismatch",
                                     f"{v.label} at vertex {v.index} has "
                                     f"{len(es)} inputs, arity is {arity}",
                                     (v.index,)))
            positions = [e.arg_position for e in es]
            for e in es:
                if e.arg_position < 1 or (arity is not None
                                          and e.arg_position > arity):
                    out.append(Violation("bad_arg_position",
                                         f"edge {e.src}->{e.dst} has "
                                         f"arg_position {e.arg_position}",
                                         (e.src, e.dst)))
            if len(set(positions)) != len(positions):
                out.append(Violation("duplicate_arg_position",
                                     f"vertex {v.index} ({v.label}) has "
                                     f"repeated argument positions",
                                     (v.index,)))
        elif v.kind == "variable":
            if es and v.index != graph.output_vertex:
                out.append(Violation("variable_with_in_edges",
                                     f"variable {v.label!r} at vertex "
                                     f"{v.index} has incoming edges",
                                     (v.index,)))
        else:  # constant
            if es:
                out.append(Violation("constant_with_in_edges",
                                     f"constant at vertex {v.index} has "
                                     f"incoming edges", (v.index,)))

    # every vertex must reach the output
    reach = {graph.output_vertex}
    frontier = [graph.output_vertex]
    while frontier:
        i = frontier.pop()
        for e in in_edges[i]:
            if e.src not in reach:
                reach.add(e.src)
                frontier.append(e.src)
    for v in graph.vertices:
        if v.index not in reach:
            out.append(Violation("unreachable_vertex",
                                 f"vertex {v.index} ({v.label}) has no path "
                                 f"to the output", (v.index,)))
    return out


def canonicalize(graph: ComputationGraph, codebook: Codebook | None = None,
                 local_symbols: Iterable[str] = ()) -> ComputationGraph:
    """Relabel vertices into a structure-determined order.

    Traversal: depth-first from the output vertex, visiting each vertex's
    argument subtrees in (arg_position, kind, label) order before the
    vertex itself.  The resulting postorder depends only on the graph's
    structure, so any relabeling of the same graph canonicalizes to the
    identical object.  The input vertex is then pinned to index 0 and the
    output lands at the highest index; edges are sorted by destination and
    argument position.  Idempotent.
    """
    problems = validate(graph, codebook, local_symbols)
    if problems:
        raise ValueError("cannot canonicalize an invalid graph: "
                         + "; ".join(v.message for v in problems))

    by_index = {v.index: v for v in graph.vertices}
    in_edges: dict[int, list[Edge]] = {v.index: [] for v in graph.vertices}
    for e in graph.edges:
        in_edges[e.dst].append(e)

    order: list[int] = []
    seen: set[int] = set()

    def visit(i: int) -> None:
        if i in seen:
            return
        seen.add(i)
        args = sorted(in_edges[i],
                      key=lambda e: (e.arg_position, by_index[e.src].kind,
                                     by_index[e.src].label))
        for e in args:
            visit(e.src)
        order.append(i)

    visit(graph.output_vertex)
    order.remove(graph.input_vertex)
    order.insert(0, graph.input_vertex)

    remap = {old: new for new, old in enumerate(order)}
    vertices = tuple(
        Vertex(index=remap[v.index], kind=v.kind, label=v.label,
               value=v.value, value_text=v.value_text)
        for v in sorted(graph.vertices, key=lambda v: remap[v.index]))
    edges = tuple(sorted(
        (Edge(remap[e.src], remap[e.dst], e.arg_position)
         for e in graph.edges),
        key=lambda e: (e.dst, e.arg_position, e.src)))
    return ComputationGraph(vertices=vertices, edges=edges,
                            input_vertex=remap[graph.input_vertex],
                            output_vertex=remap[graph.output_vertex])


# ---------------------------------------------------------------------------
# architecture combinators


@dataclass(frozen=True)
class Arg:
    """A hyperparameter argument: 7, 0.5, k, 2k, k/2, or a keyword like global.

    Multiples of a symbol keep an exact rational coefficient so ``2k`` and
    ``k/2`` render back exactly.
    """

    form: str                       # int | float | symbol | mult | keyword
    number: float | None = None
    symbol: str | None = None
    coeff: Fraction = Fraction(1)
    text: str = ""

    @staticmethod
    def integer(value: int) -> "Arg":
        return Arg(form="int", number=float(value), text=str(value))

    @staticmethod
    def real(value: float, text: str | None = None) -> "Arg":
        return Arg(form="float", number=value, text=text or repr(value))

    @staticmethod
    def sym(name: str) -> "Arg":
        return Arg(form="symbol", symbol=name, text=name)

    @staticmethod
    def mult(coeff: Fraction, name: str) -> "Arg":
        if coeff.denominator == 1:
            text = f"{coeff.numerator}{name}"
        elif coeff.numerator == 1:
            text = f"{name}/{coeff.denominator}"
        else:
            text = f"{coeff.numerator}{name}/{coeff.denominator}"
        return Arg(form="mult", symbol=name, coeff=coeff, text=text)

    @staticmethod
    def keyword(word: str) -> "Arg":
        return Arg(form="keyword", symbol=word, text=word)

    def render(self) -> str:
        return self.text


@dataclass(frozen=True)
class PrimitiveLayer:
    symbol: str
    args: tuple[Arg, ...] = ()


@dataclass(frozen=True)
class NamedRef:
    name: str
    args: tuple[Arg, ...] = ()


@dataclass(frozen=True)
class Chain:
    elements: tuple["ArchNode", ...]


@dataclass(frozen=True)
class Replicate:
    node: "ArchNode"
    count: int


@dataclass(frozen=True)
class SkipAdd:
    """A branch whose output is added back to its input (identity bypass)."""

    body: "ArchNode"


@dataclass(frozen=True)
class ConcatJoin:
    """Parallel branches joined by channel-wise concatenation."""

    branches: tuple["ArchNode", ...]


@dataclass(frozen=True)
class DenseBlock:
    """``count`` copies of ``body``, each consuming the concat of all
    previous outputs."""

    count: Arg
    body: "ArchNode"


ArchNode = Union[PrimitiveLayer, NamedRef, Chain, Replicate, SkipAdd,
                 ConcatJoin, DenseBlock]


@dataclass(frozen=True)
class ArchDefinition:
    name: str
    params: tuple[str, ...]
    body: ArchNode


@dataclass
class ArchitectureSpec:
    definitions: dict[str, ArchDefinition] = field(default_factory=dict)
    bindings: dict[str, Arg] = field(default_factory=dict)
    forward_pass: ArchNode | None = None


def iter_nodes(node: ArchNode):
    """Yield node and all descendants, preorder."""
    yield node
    if isinstance(node, Chain):
        for el in node.elements:
            yield from iter_nodes(el)
    elif isinstance(node, Replicate):
        yield from iter_nodes(node.node)
    elif isinstance(node, SkipAdd):
        yield from iter_nodes(node.body)
    elif isinstance(node, ConcatJoin):
        for br in node.branches:
            yield from iter_nodes(br)
    elif isinstance(node, DenseBlock):
        yield from iter_nodes(node.body)


def validate_architecture(spec: ArchitectureSpec,
                          codebook: Codebook | None = None,
                          equation_names: Iterable[str] = ()
                          ) -> list[Violation]:
    """Check name resolution, definition order, and combinator shape."""
    if codebook is None:
        codebook = default_codebook()
    known = set(equation_names)
    out: list[Violation] = []

    def check_node(node: ArchNode, owner: str) -> None:
        for sub in iter_nodes(node):
            if isinstance(sub, PrimitiveLayer):
                entry = codebook.resolve(sub.symbol)
                if entry is None:
                    if sub.symbol not in known:
                        out.append(Violation(
                            "unknown_symbol",
                            f"{owner}: {sub.symbol!r} is neither a codebook "
                            f"layer nor a defined name"))
                elif len(sub.args) > len(entry.hyperparams):
                    out.append(Violation(
                        "too_many_args",
                        f"{owner}: {sub.symbol} takes at most "
                        f"{len(entry.hyperparams)} arguments, got "
                        f"{len(sub.args)}"))
            elif isinstance(sub, NamedRef):
                if sub.name not in known:
                    code = ("forward_reference"
                            if sub.name in spec.definitions or sub.name == owner
                            else "unknown_symbol")
                    out.append(Violation(
                        code, f"{owner}: {sub.name!r} used before its "
                              f"definition"))
                else:
                    target = spec.definitions.get(sub.name)
                    # references may omit trailing arguments; only an excess
                    # of arguments is a shape error
                    if target is not None and len(sub.args) > len(target.params):
                        out.append(Violation(
                            "arity_mismatch",
                            f"{owner}: {sub.name} takes at most "
                            f"{len(target.params)} arguments, got "
                            f"{len(sub.args)}"))
            elif isinstance(sub, Replicate) and sub.count < 1:
                out.append(Violation(
                    "bad_replication",
                    f"{owner}: replication count {sub.count} < 1"))
            elif isinstance(sub, ConcatJoin) and len(sub.branches) < 2:
                out.append(Violation(
                    "bad_join", f"{owner}: concat join needs >= 2 branches"))

    for name, definition in spec.definitions.items():
        check_node(definition.body, name)
        known.add(name)
    if spec.forward_pass is not None:
        check_node(spec.forward_pass, "forward")
    return out
