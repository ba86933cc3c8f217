from hypothesis import given, settings, strategies as st

import _progen
from dualspec import lang
from dualspec.cfg import CUSE, DEF, PUSE, build_cfg, dump, function_cfg


def _cfg(src, name="f"):
    return function_cfg(lang.parse(src).function(name))


def _max(corpus):
    return function_cfg(lang.parse_file(corpus / "max.impx").function("max"))


def test_max_blocks_and_edges(corpus):
    g = _max(corpus)
    assert {b.id: list(b.lines) for b in g.blocks} == {1: [3, 4], 2: [5], 3: [7], 4: [8], 5: [9], 6: [11]}
    assert set(g.edges) == {(1, 2), (2, 3), (2, 6), (3, 4), (3, 5), (4, 5), (5, 2)}
    assert g.entry == 1 and g.exits == [6]


def test_max_annotations(corpus):
    g = _max(corpus)
    names = lambda pairs: {v for v, _ in pairs}
    assert names(g.block(1).defs) == {"i", "array", "length", "max"}
    assert names(g.block(1).cuses) == {"i", "array"}
    assert names(g.block(4).defs) == {"max"} and names(g.block(4).cuses) == {"i", "array"}
    assert names(g.block(5).defs) == {"i"} and names(g.block(5).cuses) == {"i"}
    assert names(g.block(6).cuses) == {"max"} and not g.block(6).defs
    assert names(g.block(2).pred_puse) == {"i", "length"}
    assert names(g.block(3).pred_puse) == {"i", "array", "max"}


def test_pre_increment_event_order(corpus):
    g = _max(corpus)
    line4 = [(e.kind, e.var) for e in g.block(1).events if e.line == 4]
    assert line4 == [(CUSE, "i"), (DEF, "i"), (CUSE, "array"), (DEF, "max")]


def test_parameters_defined_on_signature_line(corpus):
    g = _max(corpus)
    params = [e for e in g.block(1).events if e.line == 1]
    assert [(e.kind, e.var) for e in params] == [(DEF, "array"), (DEF, "length")]


def test_straight_line():
    g = _cfg("int f(int x)\n{\n  int y = x + 1;\n  y++;\n  return y;\n}\n")
    assert len(g.blocks) == 1 and g.edges == []


def test_diamond():
    g = _cfg("int f(int x)\n{\n  if (x > 0)\n  {\n    x = 1;\n  }\n  else\n  {\n    x = 2;\n  }\n  return x;\n}\n")
    assert len(g.blocks) == 4 and len(g.edges) == 4
    assert g.block(1).successors == (2, 3)


def test_unused_parameter():
    g = _cfg("int f(int p)\n{\n  return 0;\n}\n")
    assert g.block(1).defs == [("p", 1)]
    assert not g.block(1).cuses


def test_array_store_events():
    g = _cfg("int f(int[] a, int j)\n{\n  a[j] = a[j] + 1;\n  return 0;\n}\n")
    ev = [(e.kind, e.var) for e in g.block(1).events if e.line == 3]
    assert (DEF, "a") in ev
    assert {v for k, v in ev if k == CUSE} == {"a", "j"}


def test_leading_while_gets_empty_entry():
    g = _cfg("int f(int x)\n{\n  while (x > 0)\n  {\n    x--;\n  }\n  return x;\n}\n")
    assert g.block(1).lines == ()
    assert g.block(2).lines == (3,)
    assert (3, 2) in g.edges


def test_trailing_if_gets_end_block():
    g = _cfg("int f(int x)\n{\n  if (x > 0)\n  {\n    return 1;\n  }\n}\n")
    end = g.block(g.block(1).false_succ)
    assert end.lines == () and end.next is None


def test_dump_format(corpus):
    text = dump(_max(corpus))
    assert "node 1: lines={3,4} def={array@1,length@1,i@3,i@4,max@4} cuse={i@4,array@4}" in text
    assert "edge 2 -> 6: puse={i@5,length@5}" in text


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_blocks_partition_executable_lines(seed):
    _, prog = _progen.random_program(seed)
    g = build_cfg(prog.functions[0])
    lines = [ln for b in g.blocks for ln in b.lines]
    assert sorted(lines) == lang.executable_lines(prog, "f")
    assert len(lines) == len(set(lines))


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_predicates_have_two_successors(seed):
    _, prog = _progen.random_program(seed)
    g = function_cfg(prog.functions[0])
    ids = set(g.nodes)
    for b in g.blocks:
        if any(e.kind == PUSE for e in b.events) or b.predicate is not None:
            assert len(b.successors) == 2
    for a, s in g.edges:
        assert a in ids and s in ids
    reached, todo = {g.entry}, [g.entry]
    while todo:
        for s in g.successors(todo.pop()):
            if s not in reached:
                reached.add(s)
                todo.append(s)
    assert reached == ids
