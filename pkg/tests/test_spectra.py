import pytest
from hypothesis import given, strategies as st

from dualspec import lang, runner, spectra
from dualspec.cfg import function_cfg
from dualspec.dataflow import all_uses
from dualspec.spectra import Counts, SpectrumMatrix


@pytest.fixture
def max_matrix(corpus):
    prog = lang.parse_file(corpus / "max.impx")
    reqs = all_uses(function_cfg(prog.function("max")))
    return runner.run_suite(prog, reqs, runner.load_suite(corpus / "max.tests"))


def test_max_tallies(max_matrix):
    assert max_matrix.tally("line:5") == Counts(c_ef=1, c_nf=1, c_ep=3, c_np=0)
    assert max_matrix.tally("line:3") == Counts(c_ef=2, c_nf=0, c_ep=3, c_np=0)
    assert spectra.tally(max_matrix, "line:8") == Counts(0, 2, 3, 0)


def test_uncovered_element():
    m = SpectrumMatrix.from_coverage(["a", "b", "c"], ["pass", "fail", "pass"], ["line:9"], [set(), set(), set()])
    assert m.tally("line:9") == Counts(c_ef=0, c_nf=1, c_ep=0, c_np=2)


def test_unknown_element(max_matrix):
    with pytest.raises(spectra.SpectrumError):
        max_matrix.tally("line:99")


def test_csv_round_trip(max_matrix):
    text = spectra.export_csv(max_matrix)
    assert text.splitlines()[0].startswith("test,verdict,line:3,line:4")
    assert "\r" not in text
    assert spectra.import_csv(text) == max_matrix


def test_empty_matrix_is_header_only():
    m = SpectrumMatrix.from_coverage([], [], ["line:1", "dua:c:1:2:x"], [])
    text = spectra.export_csv(m)
    assert text == "test,verdict,line:1,dua:c:1:2:x\n"
    assert spectra.import_csv(text) == m


@pytest.mark.parametrize("text, fragment", [
    ("test,verdict,line:1\nt1,pass,2\n", "row 2, column 3"),
    ("test,verdict,line:1\nt1,maybe,1\n", "verdict"),
    ("test,verdict,line:1\nt1,pass,1,0\n", "row 2"),
    ("tst,verdict,line:1\n", "header"),
    ("test,verdict,lines:1\n", "lines:1"),
    ("test,verdict,line:1,line:1\n", "duplicate"),
])
def test_csv_errors(text, fragment):
    with pytest.raises(spectra.SpectrumError, match=fragment):
        spectra.import_csv(text)


def test_element_ids():
    assert spectra.edge_id(2, 6) == "edge:2-6"
    assert spectra.puse_id(1, 2, 3, "length") == "dua:p:1:2:3:length"
    assert spectra.element_kind("dua:c:1:1:i") == "dua"
    assert spectra.element_kind("node:3") == "node"
    assert sorted(["line:10", "line:9"], key=spectra.sort_key) == ["line:9", "line:10"]


def test_select_and_restrict(max_matrix):
    lines = max_matrix.select("line")
    sub = max_matrix.restrict(lines)
    assert sub.elements == tuple(lines)
    assert all(sub.tally(e) == max_matrix.tally(e) for e in lines)


matrices = st.integers(min_value=0, max_value=8).flatmap(lambda n_el: st.lists(
    st.tuples(st.sampled_from(["pass", "fail"]), st.lists(st.booleans(), min_size=n_el, max_size=n_el)),
    max_size=10,
).map(lambda rows: SpectrumMatrix(
    tuple(f"t{i}" for i in range(len(rows))),
    tuple(v for v, _ in rows),
    tuple(f"line:{j + 1}" for j in range(n_el)),
    tuple(tuple(r) for _, r in rows),
)))


@given(matrices)
def test_counts_partition_tests(m):
    for e in m.elements:
        c = m.tally(e)
        assert c.c_ef + c.c_nf == m.failing
        assert c.c_ep + c.c_np == m.passing


@given(matrices, st.randoms(use_true_random=False))
def test_tally_permutation_invariant(m, rnd):
    order = list(range(m.total_tests))
    rnd.shuffle(order)
    cols = list(m.elements)
    rnd.shuffle(cols)
    perm = SpectrumMatrix(
        tuple(m.tests[i] for i in order),
        tuple(m.verdicts[i] for i in order),
        m.elements,
        tuple(m.rows[i] for i in order),
    ).restrict(cols)
    assert all(perm.tally(e) == m.tally(e) for e in m.elements)


@given(matrices)
def test_csv_round_trip_property(m):
    assert spectra.import_csv(spectra.export_csv(m)) == m
