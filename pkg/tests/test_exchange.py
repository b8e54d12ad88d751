import pytest

from conftest import make_auto

from polaris import exchange
from polaris.automata import is_bisimilar, natural_project, parallel_compose
from polaris.errors import ParseError

SAMPLE = """\
# a small plant
states: O1 R1
initial: R1
marked: R1
controllable: c1
uncontrollable: d11
owners: c1=1 d11=1
trans: O1 d11 R1
trans: R1 c1 O1
"""


def test_round_trip_is_byte_identical_for_canonical_files():
    a = exchange.loads(SAMPLE)
    text = exchange.dumps(a)
    # SAMPLE is canonically ordered except for its comment line
    assert exchange.dumps(exchange.loads(text)) == text
    assert text == "\n".join(SAMPLE.splitlines()[1:]) + "\n"


def test_reader_tolerates_comments_blank_lines_and_order():
    shuffled = """
trans: R1 c1 O1

initial: R1
marked: R1   # the ready state
states: R1 O1
uncontrollable: d11
trans: O1 d11 R1
controllable: c1
"""
    a = exchange.loads(shuffled)
    assert a.initial == "R1"
    assert a.step1("R1", "c1") == "O1"


def test_owner_tags_round_trip():
    a = exchange.loads(SAMPLE)
    assert a.event("c1").owners == frozenset({1})
    b = exchange.loads(exchange.dumps(a))
    assert b.alphabet == a.alphabet


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("states: a\nmarked:\n", "initial"),
        ("initial: a\nmarked:\n", "states"),
        ("states: a b\ninitial: a\ntrans: a ? b\n", "invalid token"),
        ("states: a\ninitial: a\nbogus: x\n", "unknown section"),
        ("states: a\ninitial: a\ntrans: a e\n", "trans takes"),
        ("states: a\ninitial: a\ncontrollable: e\nuncontrollable: e\n", "both"),
        ("states: a\ninitial: a b\n", "exactly one"),
        ("states: a\ninitial: a\nowners: e\n", "owners"),
    ],
)
def test_reader_errors(text, fragment):
    with pytest.raises(ParseError) as err:
        exchange.loads(text)
    assert fragment in str(err.value)


def test_writer_renames_composite_state_names():
    a = make_auto([("q0", "a", "q1")], marked={"q1"})
    b = make_auto([("p0", "b", "p1")], initial="p0", marked={"p1"})
    product = parallel_compose(a, b)
    text = exchange.dumps(product)
    reread = exchange.loads(text)
    assert is_bisimilar(reread, product)
    assert all(not q.startswith("⟨") for q in reread.states)


def test_writer_renames_subset_state_names():
    a = make_auto([("q0", "h", "q1"), ("q1", "b", "q2")], marked={"q2"})
    proj = natural_project(a, {"b"})
    reread = exchange.loads(exchange.dumps(proj))
    assert is_bisimilar(reread, proj)


def test_file_io_round_trip(tmp_path):
    a = exchange.loads(SAMPLE)
    path = tmp_path / "plant.aut"
    exchange.write(a, path)
    assert exchange.read(path) == a


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        exchange.read(tmp_path / "nope.aut")
