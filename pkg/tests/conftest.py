import pytest

from analogid.benchmark import load_demo_corpus
from analogid.netlist import parse_netlist
from analogid.pipeline import Demo

# the amplifier used by the hierarchy-1/2 prompt demonstration
HL12_TEXT = """\
m1 a ibias supply supply pmos
m2 b ibias supply supply pmos
m3 c a d d nmos
m4 d c ground ground nmos
m5 out a e e nmos
m6 e c ground ground nmos
m7 c ibias supply supply pmos
m8 out ibias supply supply pmos
m9 f a g g nmos
m10 g b ground ground nmos
m11 c in1 f f nmos
m12 out in2 f f nmos
c1 out ground
m13 a a ground ground nmos
m14 b b ground ground nmos
m15 ibias ibias supply supply pmos
"""


@pytest.fixture(scope="session")
def demo_entries():
    return {e.id: e for e in load_demo_corpus()}


@pytest.fixture(scope="session")
def demo_netlists(demo_entries):
    return {k: e.netlist for k, e in demo_entries.items()}


@pytest.fixture(scope="session")
def demos(demo_entries):
    return [Demo(e.id, e.netlist, e.truth) for e in demo_entries.values()]


@pytest.fixture
def hl12():
    return parse_netlist(HL12_TEXT)
