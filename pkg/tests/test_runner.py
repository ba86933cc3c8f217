import random

import pytest
from hypothesis import given, settings, strategies as st

import _oracles
import _progen
from dualspec import lang, runner, spectra
from dualspec.cfg import function_cfg
from dualspec.dataflow import all_uses


def _setup(src, name="f"):
    prog = lang.parse(src)
    return prog, all_uses(function_cfg(prog.function(name)))


def _run(prog, reqs, args, expected=0, name="f"):
    return runner.execute_test(prog, reqs, runner.TestCase("t", name, tuple(args), expected))


@pytest.fixture
def max_setup(corpus):
    prog = lang.parse_file(corpus / "max.impx")
    reqs = all_uses(function_cfg(prog.function("max")))
    return prog, reqs, runner.load_suite(corpus / "max.tests")


def test_max_t1(max_setup):
    prog, reqs, suite = max_setup
    ex = runner.execute_test(prog, reqs, suite[0])
    assert ex.verdict == "pass" and ex.outcome == runner.Value(3)
    assert ex.covered_lines >= {3, 4, 5, 7, 8, 9, 11}


def test_max_t4_misses_line_8(max_setup):
    prog, reqs, suite = max_setup
    ex = runner.execute_test(prog, reqs, suite[3])
    assert ex.verdict == "fail" and ex.outcome == runner.Value(3)
    assert 8 not in ex.covered_lines


def test_max_t5_faults_but_keeps_coverage(max_setup):
    prog, reqs, suite = max_setup
    ex = runner.execute_test(prog, reqs, suite[4])
    assert ex.outcome == runner.RuntimeFault("index-out-of-bounds", 4)
    assert ex.verdict == "fail"
    assert ex.covered_lines == {3, 4}
    assert ex.covered_duas == {"dua:c:1:1:i", "dua:c:1:1:array"}


def test_run_suite_rows(max_setup):
    prog, reqs, suite = max_setup
    m = runner.run_suite(prog, reqs, suite)
    assert m.tests == ("t1", "t2", "t3", "t4", "t5")
    assert m.verdicts == ("pass", "pass", "pass", "fail", "fail")
    assert list(m.elements) == reqs.element_ids()


def test_run_suite_parallel_matches(max_setup):
    prog, reqs, suite = max_setup
    assert runner.run_suite(prog, reqs, suite, jobs=2) == runner.run_suite(prog, reqs, suite)


def test_empty_suite(max_setup):
    prog, reqs, _ = max_setup
    assert runner.run_suite(prog, reqs, []).total_tests == 0


def test_single_passing_test_has_no_failing_coverage(max_setup):
    prog, reqs, suite = max_setup
    m = runner.run_suite(prog, reqs, suite[:1])
    assert all(m.tally(e).c_ef == 0 for e in m.elements)


def test_error_expectation():
    prog, reqs = _setup("int f(int a)\n{\n  return 10 / a;\n}\n")
    assert _run(prog, reqs, [0], runner.ERROR).verdict == "pass"
    assert _run(prog, reqs, [2], runner.ERROR).verdict == "fail"
    assert _run(prog, reqs, [0], 0).outcome == runner.RuntimeFault("division-by-zero", 3)


def test_java_division_and_remainder():
    prog, reqs = _setup("int f(int a, int b)\n{\n  return a / b * 100 + a % b;\n}\n")
    assert _run(prog, reqs, [-7, 2]).outcome == runner.Value(-3 * 100 + -1)
    assert _run(prog, reqs, [7, -2]).outcome == runner.Value(-3 * 100 + 1)


def test_budget_exhaustion():
    prog, reqs = _setup("int f(int a)\n{\n  while (a > 0)\n  {\n    a++;\n  }\n  return a;\n}\n")
    ex = runner.execute_test(prog, reqs, runner.TestCase("t", "f", (1,), 0), budget=1000)
    assert ex.outcome.kind == "budget"
    assert ex.covered_lines == {3, 5}


def test_stack_overflow():
    prog, reqs = _setup("int f(int a)\n{\n  return f(a + 1);\n}\n")
    assert _run(prog, reqs, [0]).outcome.kind == "stack-overflow"


def test_missing_return():
    prog, reqs = _setup("int f(int a)\n{\n  if (a > 0)\n  {\n    return 1;\n  }\n}\n")
    assert _run(prog, reqs, [0]).outcome.kind == "no-return"
    assert _run(prog, reqs, [3]).outcome == runner.Value(1)


def test_arrays_by_reference_and_helper_calls():
    src = ("int bump(int[] a)\n{\n  a[0] += 5;\n  return 0;\n}\n\n"
           "int f(int[] a)\n{\n  int r = bump(a);\n  return a[0] + len(a);\n}\n")
    prog, reqs = _setup(src)
    ex = _run(prog, reqs, [[1, 2]])
    assert ex.outcome == runner.Value(8)
    assert ex.covered_lines == {9, 10}


def test_caller_arrays_not_mutated():
    prog, reqs = _setup("int f(int[] a)\n{\n  a[0] = 9;\n  return a[0];\n}\n")
    case = runner.TestCase("t", "f", ([1],), 9)
    runner.execute_test(prog, reqs, case)
    assert case.args == ([1],)


def test_short_circuit_puse_uses_current_def():
    prog, reqs = _setup("int f(int a, int b)\n{\n  if (a > 0 && b > 0)\n  {\n    return 1;\n  }\n  return 0;\n}\n")
    ex = _run(prog, reqs, [0, 5])
    assert "dua:p:1:1:3:b" in ex.covered_duas
    assert "dua:p:1:1:3:a" in ex.covered_duas


def test_configuration_errors():
    prog, reqs = _setup("int f(int a)\n{\n  return a;\n}\n")
    with pytest.raises(runner.ConfigurationError):
        _run(prog, reqs, [[1]])
    with pytest.raises(runner.ConfigurationError):
        _run(prog, reqs, [1, 2])
    with pytest.raises(runner.ConfigurationError):
        runner.execute_test(prog, reqs, runner.TestCase("t", "g", (1,), 0))


def test_fault_keeps_prefix_coverage():
    prog, reqs = _setup("int f(int a, int b)\n{\n  int x = a + b;\n  int y = x / b;\n  return y;\n}\n")
    ok = _run(prog, reqs, [4, 2])
    bad = _run(prog, reqs, [4, 0])
    assert bad.outcome.kind == "division-by-zero"
    assert bad.covered_lines == {3, 4}
    assert bad.covered_duas == ok.covered_duas - {"dua:c:1:1:y"}


def test_suite_round_trip():
    text = "t1 ; max ; [1,2,3],3 ; 3\n# comment\nt2 ; max ; [4],1 ; ERROR\n"
    suite = runner.parse_suite(text)
    assert suite[1].expected == runner.ERROR and suite[0].args == ([1, 2, 3], 3)
    assert runner.parse_suite(runner.format_suite(suite)) == suite


@pytest.mark.parametrize("text", [
    "t1 ; max ; [1],1\n",
    "t1 ; max ; [1,,],1 ; 3\n",
    "t1 ; max ; 1 ; x\n",
    "t1 ; max ; 1 ; 1\nt1 ; max ; 2 ; 2\n",
    't1 ; max ; "a" ; 1\n',
])
def test_suite_errors(text):
    with pytest.raises(runner.SuiteFormatError):
        runner.parse_suite(text)


@settings(max_examples=120, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.integers(min_value=0, max_value=2**32))
def test_dynamic_duas_sound_and_match_replay(seed, input_seed):
    _, prog = _progen.random_program(seed)
    g = function_cfg(prog.functions[0])
    reqs = all_uses(g)
    static = {d.element_id for d in reqs.duas}
    for args in _progen.random_inputs(random.Random(input_seed), prog, 4):
        ex = _run(prog, reqs, args)
        assert isinstance(ex.outcome, runner.Value)
        assert ex.covered_duas <= static
        assert ex.covered_duas == _oracles.replay_duas(g, ex.trace)
        assert ex.covered_nodes == set(ex.trace)
        assert ex.covered_edges == set(zip(ex.trace, ex.trace[1:]))
        assert _run(prog, reqs, args) == ex


def test_matrix_ids_only_from_requirements(max_setup):
    prog, reqs, suite = max_setup
    for ex in runner.execute_suite(prog, reqs, suite):
        assert runner.coverage_ids(ex) <= set(reqs.element_ids())
        assert all(spectra.is_element_id(i) for i in runner.coverage_ids(ex))
