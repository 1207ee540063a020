"""Hypothesis strategies for small flat netlists."""
from hypothesis import strategies as st

from analogid.netlist import parse_netlist

NETS = ("a", "b", "c", "d", "e", "out", "in1", "in2", "ibias", "supply", "ground")


@st.composite
def netlist_texts(draw, max_devices=12):
    net = st.sampled_from(NETS)
    n_mos = draw(st.integers(0, max_devices))
    lines = []
    for i in range(n_mos):
        d, g, s, b = (draw(net) for _ in range(4))
        # bias draws toward diode connections and rail bulks so mirrors appear
        if draw(st.booleans()):
            g = d
        if draw(st.booleans()):
            b = s
        lines.append(f"m{i + 1} {d} {g} {s} {b} {draw(st.sampled_from(('nmos', 'pmos')))}")
    for i in range(draw(st.integers(0, min(2, max_devices - n_mos)))):
        lines.append(f"c{i + 1} {draw(net)} {draw(net)}")
    order = draw(st.permutations(range(len(lines))))
    return "\n".join(lines[k] for k in order) + ("\n" if lines else "")


def netlists(max_devices=12):
    return netlist_texts(max_devices).map(parse_netlist)
