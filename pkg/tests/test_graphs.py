"""Computation graphs: validation codes, canonical order, architecture shape.

The normalization fixture below hand-builds the graph of

    BN(x) = b + g * (x - mu) / sqrt(sigma2 + 0.01)

13 vertices (6 variables counting the output, 1 constant, 6 operators)
joined by 12 edges.
"""

from __future__ import annotations

import random

import pytest

from descbound.graphs import (Arg, ArchDefinition, ArchitectureSpec, Chain,
                              ComputationGraph, ConcatJoin, Edge, NamedRef,
                              PrimitiveLayer, Replicate, SkipAdd, Vertex,
                              canonicalize, validate, validate_architecture)


def bn_graph() -> ComputationGraph:
    v = [
        Vertex(0, "variable", "x"),
        Vertex(1, "variable", "mu"),
        Vertex(2, "operator", "subtract"),
        Vertex(3, "variable", "sigma2"),
        Vertex(4, "constant", "0.01", value=0.01, value_text="0.01"),
        Vertex(5, "operator", "add"),
        Vertex(6, "operator", "sqrt"),
        Vertex(7, "variable", "g"),
        Vertex(8, "operator", "multiply"),
        Vertex(9, "operator", "divide"),
        Vertex(10, "variable", "b"),
        Vertex(11, "operator", "add"),
        Vertex(12, "variable", "output"),
    ]
    e = [
        Edge(0, 2, 1), Edge(1, 2, 2),       # x - mu
        Edge(3, 5, 1), Edge(4, 5, 2),       # sigma2 + 0.01
        Edge(5, 6, 1),                      # sqrt(...)
        Edge(7, 8, 1), Edge(2, 8, 2),       # g * (x - mu)
        Edge(8, 9, 1), Edge(6, 9, 2),       # ... / sqrt(...)
        Edge(10, 11, 1), Edge(9, 11, 2),    # b + ...
        Edge(11, 12, 1),                    # -> output
    ]
    return ComputationGraph(vertices=tuple(v), edges=tuple(e),
                            input_vertex=0, output_vertex=12)


def codes(graph, **kwargs) -> set[str]:
    return {v.code for v in validate(graph, **kwargs)}


def test_bn_fixture_shape_and_validity():
    g = bn_graph()
    assert len(g.vertices) == 13
    assert len(g.edges) == 12
    assert validate(g) == []


def test_vertex_kind_must_be_known():
    with pytest.raises(ValueError):
        Vertex(0, "wire", "x")
    with pytest.raises(ValueError):
        Vertex(0, "constant", "3")  # constants carry their value


# --- violation codes, one minimal trigger each ------------------------------


def _two_vertex(edges, v0=("variable", "x"), v1=("variable", "output"),
                input_vertex=0, output_vertex=1):
    return ComputationGraph(
        vertices=(Vertex(0, *v0), Vertex(1, *v1)),
        edges=tuple(edges), input_vertex=input_vertex,
        output_vertex=output_vertex)


def test_bad_index_set():
    g = ComputationGraph(
        vertices=(Vertex(0, "variable", "x"), Vertex(2, "variable", "output")),
        edges=(), input_vertex=0, output_vertex=2)
    assert codes(g) == {"bad_index_set"}


def test_dangling_edge():
    g = _two_vertex([Edge(0, 5, 1)])
    assert codes(g) == {"dangling_edge"}


def test_input_output_placement():
    g = _two_vertex([Edge(0, 1, 1)], input_vertex=1, output_vertex=0)
    got = codes(g)
    assert "input_not_lowest" in got
    assert "output_not_highest" in got


def test_input_has_in_edges():
    g = ComputationGraph(
        vertices=(Vertex(0, "variable", "x"), Vertex(1, "operator", "sqrt"),
                  Vertex(2, "variable", "output")),
        edges=(Edge(0, 1, 1), Edge(1, 2, 1), Edge(1, 0, 1)),
        input_vertex=0, output_vertex=2)
    assert "input_has_in_edges" in codes(g)


def test_output_has_out_edges():
    g = ComputationGraph(
        vertices=(Vertex(0, "variable", "x"), Vertex(1, "operator", "sqrt"),
                  Vertex(2, "variable", "output")),
        edges=(Edge(0, 1, 1), Edge(1, 2, 1), Edge(2, 1, 2)),
        input_vertex=0, output_vertex=2)
    assert "output_has_out_edges" in codes(g)


def test_cycle_detected():
    g = ComputationGraph(
        vertices=(Vertex(0, "variable", "x"), Vertex(1, "operator", "add"),
                  Vertex(2, "operator", "sqrt"), Vertex(3, "variable", "output")),
        edges=(Edge(0, 1, 1), Edge(2, 1, 2), Edge(1, 2, 1), Edge(2, 3, 1)),
        input_vertex=0, output_vertex=3)
    assert "cycle_detected" in codes(g)


def test_unknown_operator_symbol():
    g = ComputationGraph(
        vertices=(Vertex(0, "variable", "x"),
                  Vertex(1, "operator", "Frobnicate"),
                  Vertex(2, "variable", "output")),
        edges=(Edge(0, 1, 1), Edge(1, 2, 1)),
        input_vertex=0, output_vertex=2)
    assert "unknown_symbol" in codes(g)
    # locally defined equation names are acceptable operators
    assert codes(g, local_symbols=("Frobnicate",)) == set()


def test_arity_mismatch():
    g = ComputationGraph(
        vertices=(Vertex(0, "variable", "x"), Vertex(1, "variable", "y"),
                  Vertex(2, "operator", "sqrt"), Vertex(3, "variable", "output")),
        edges=(Edge(0, 2, 1), Edge(1, 2, 2), Edge(2, 3, 1)),
        input_vertex=0, output_vertex=3)
    assert "arity_mismatch" in codes(g)


def test_bad_and_duplicate_arg_positions():
    g = ComputationGraph(
        vertices=(Vertex(0, "variable", "x"), Vertex(1, "variable", "y"),
                  Vertex(2, "operator", "add"), Vertex(3, "variable", "output")),
        edges=(Edge(0, 2, 3), Edge(1, 2, 3), Edge(2, 3, 1)),
        input_vertex=0, output_vertex=3)
    got = codes(g)
    assert "bad_arg_position" in got
    assert "duplicate_arg_position" in got


def test_variable_and_constant_with_in_edges():
    g = ComputationGraph(
        vertices=(Vertex(0, "variable", "x"), Vertex(1, "variable", "y"),
                  Vertex(2, "constant", "2", value=2.0, value_text="2"),
                  Vertex(3, "operator", "add"), Vertex(4, "variable", "output")),
        edges=(Edge(0, 1, 1), Edge(0, 2, 1), Edge(1, 3, 1), Edge(2, 3, 2),
               Edge(3, 4, 1)),
        input_vertex=0, output_vertex=4)
    got = codes(g)
    assert "variable_with_in_edges" in got
    assert "constant_with_in_edges" in got


def test_unreachable_vertex():
    g = ComputationGraph(
        vertices=(Vertex(0, "variable", "x"), Vertex(1, "variable", "stray"),
                  Vertex(2, "operator", "sqrt"), Vertex(3, "variable", "output")),
        edges=(Edge(0, 2, 1), Edge(2, 3, 1)),
        input_vertex=0, output_vertex=3)
    assert "unreachable_vertex" in codes(g)


# --- canonical form ---------------------------------------------------------


def _relabel(graph: ComputationGraph, mapping: dict[int, int]
             ) -> ComputationGraph:
    vertices = tuple(
        Vertex(mapping[v.index], v.kind, v.label, v.value, v.value_text)
        for v in graph.vertices)
    edges = tuple(Edge(mapping[e.src], mapping[e.dst], e.arg_position)
                  for e in graph.edges)
    return ComputationGraph(vertices=vertices, edges=edges,
                            input_vertex=mapping[graph.input_vertex],
                            output_vertex=mapping[graph.output_vertex])


def test_canonicalize_is_idempotent():
    canon = canonicalize(bn_graph())
    assert canonicalize(canon) == canon
    assert canon.input_vertex == 0
    assert canon.output_vertex == len(canon.vertices) - 1


def test_canonicalize_invariant_under_relabeling():
    base = canonicalize(bn_graph())
    n = len(base.vertices)
    rng = random.Random(20240817)
    for _ in range(50):
        # scramble only the interior: input stays lowest, output highest
        interior = list(range(1, n - 1))
        rng.shuffle(interior)
        mapping = {0: 0, n - 1: n - 1}
        mapping.update({old: new for old, new
                        in zip(range(1, n - 1), interior)})
        scrambled = _relabel(bn_graph(), mapping)
        assert canonicalize(scrambled) == base


def test_canonicalize_rejects_invalid():
    g = _two_vertex([Edge(0, 5, 1)])
    with pytest.raises(ValueError):
        canonicalize(g)


def test_edges_sorted_in_canonical_form():
    canon = canonicalize(bn_graph())
    keys = [(e.dst, e.arg_position, e.src) for e in canon.edges]
    assert keys == sorted(keys)


def test_json_roundtrip():
    g = canonicalize(bn_graph())
    assert ComputationGraph.from_json_dict(g.to_json_dict()) == g
    assert g.to_json_dict()["schema"] == "descbound.graph/1"


# --- architecture combinator checks -----------------------------------------


def _spec(**kwargs) -> ArchitectureSpec:
    return ArchitectureSpec(**kwargs)


def arch_codes(spec, **kwargs) -> set[str]:
    return {v.code for v in validate_architecture(spec, **kwargs)}


def test_architecture_valid_reference_chain():
    layer = ArchDefinition(
        "Layer", ("k",),
        Chain((PrimitiveLayer("ReLU"),
               PrimitiveLayer("Conv", (Arg.integer(3), Arg.sym("k"))))))
    block = ArchDefinition(
        "Block", ("k",),
        SkipAdd(Chain((NamedRef("Layer", (Arg.sym("k"),)),
                       NamedRef("Layer")))))  # trailing args may be omitted
    spec = _spec(definitions={"Layer": layer, "Block": block},
                 forward_pass=Chain((NamedRef("Block", (Arg.integer(64),)),
                                     PrimitiveLayer("SoftMax"))))
    assert validate_architecture(spec) == []


def test_architecture_unknown_layer():
    spec = _spec(forward_pass=PrimitiveLayer("BatchNorm"))
    assert arch_codes(spec) == {"unknown_symbol"}
    # equation names cover the gap
    assert arch_codes(spec, equation_names=("BatchNorm",)) == set()


def test_architecture_excess_primitive_args():
    spec = _spec(forward_pass=PrimitiveLayer("ReLU", (Arg.integer(5),)))
    assert arch_codes(spec) == {"too_many_args"}
    spec = _spec(forward_pass=PrimitiveLayer(
        "Conv", (Arg.integer(3), Arg.integer(64), Arg.integer(2),
                 Arg.integer(9))))
    assert arch_codes(spec) == {"too_many_args"}


def test_architecture_excess_reference_args():
    layer = ArchDefinition("Layer", ("k",), PrimitiveLayer("ReLU"))
    spec = _spec(
        definitions={"Layer": layer},
        forward_pass=NamedRef("Layer", (Arg.integer(1), Arg.integer(2))))
    assert arch_codes(spec) == {"arity_mismatch"}


def test_architecture_forward_reference():
    block = ArchDefinition("Block", ("k",), NamedRef("Layer"))
    layer = ArchDefinition("Layer", ("k",), PrimitiveLayer("ReLU"))
    # Block references Layer before Layer's definition (dict order matters)
    spec = _spec(definitions={"Block": block, "Layer": layer})
    assert arch_codes(spec) == {"forward_reference"}


def test_architecture_bad_replication_and_join():
    spec = _spec(forward_pass=Replicate(PrimitiveLayer("ReLU"), 0))
    assert arch_codes(spec) == {"bad_replication"}
    spec = _spec(forward_pass=ConcatJoin((PrimitiveLayer("ReLU"),)))
    assert arch_codes(spec) == {"bad_join"}
