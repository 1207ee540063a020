"""Regenerate the bundled demonstration corpus under src/analogid/data/demos.

Ground truth is the rule-based detector output. Before writing, every
hand-checked expectation below is asserted so a detector change cannot
silently rewrite the corpus.
"""
from __future__ import annotations

import argparse
from pathlib import Path

from analogid.annotations import LEVELS, dump_level
from analogid.detectors import identify
from analogid.netlist import anonymize, parse_netlist, serialize_netlist

DEMOS = {
    "demo1": """\
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
""",
    "demo2": """\
c1 a out
m1 b c supply supply pmos
m2 d e ground ground nmos
m3 a d e e nmos
m4 e e ground ground nmos
m5 f ibias g g pmos
m6 g c supply supply pmos
m7 d in1 f f pmos
m8 a in2 f f pmos
c2 out ground
m9 out b h h nmos
m10 h h ground ground nmos
m11 out a supply supply pmos
m12 b b i i nmos
m13 i h ground ground nmos
m14 ibias ibias c c pmos
m15 c c supply supply pmos
""",
    "demo3": """\
m1 a ibias ground ground nmos
m2 b b supply supply pmos
m3 c c supply supply pmos
m4 d ibias ground ground nmos
m5 e ibias ground ground nmos
m6 b out2 d d nmos
m7 c vref d d nmos
m8 b out1 e e nmos
m9 c vref e e nmos
m10 out1 a f f pmos
m11 f c supply supply pmos
m12 out2 a g g pmos
m13 g c supply supply pmos
m14 h ibias ground ground nmos
m15 out1 in1 h h nmos
m16 out2 in2 h h nmos
c1 out1 ground
c2 out2 ground
m17 ibias ibias ground ground nmos
m18 a a supply supply pmos
""",
    "demo4": """\
c1 a out
m1 b ibias ground ground nmos
m2 c ibias ground ground nmos
m3 d ibias ground ground nmos
m4 e b supply supply pmos
m5 f e g g nmos
m6 a e h h nmos
m7 f d i i pmos
m8 i f supply supply pmos
m9 a d j j pmos
m10 j f supply supply pmos
m11 k ibias ground ground nmos
m12 g in1 k k nmos
m13 h in2 k k nmos
c2 out ground
m14 out a ground ground nmos
m15 out c l l pmos
m16 l l supply supply pmos
m17 e e k k nmos
m18 ibias ibias ground ground nmos
m19 b b supply supply pmos
m20 c c m m pmos
m21 m l supply supply pmos
m22 d d supply supply pmos
""",
    "demo5": """\
m1 a ibias supply supply pmos
m2 b b supply supply pmos
m3 out b supply supply pmos
m4 b a c c nmos
m5 c d ground ground nmos
m6 out a e e nmos
m7 e d ground ground nmos
m8 f ibias supply supply pmos
m9 b in1 f f pmos
m10 out in2 f f pmos
c1 out ground
m11 a a d d nmos
m12 d d ground ground nmos
m13 ibias ibias supply supply pmos
""",
    # three-stage amplifier with an output-to-internal feedback transistor
    "demo6": """\
m1 ibias ibias supply supply pmos
m2 a ibias supply supply pmos
m3 b in1 a a pmos
m4 c in2 a a pmos
m5 b b ground ground nmos
m6 c b ground ground nmos
m7 d c ground ground nmos
m8 d ibias supply supply pmos
m9 out d supply supply pmos
m10 out e ground ground nmos
m11 e e ground ground nmos
m12 e ibias supply supply pmos
m13 d out ground ground nmos
c1 c out
c2 d out
c3 out ground
""",
}


def _s(*names):
    return frozenset(names)


# (demo, level, label) -> expected component sets, checked by hand
EXPECTED = {
    ("demo1", "HL1", "MosfetDiode"): {_s("m13", "m14", "m15")},
    ("demo1", "HL1", "load_cap"): {_s("c1")},
    ("demo1", "HL2", "CM"): {_s("m3", "m4", "m5", "m6"), _s("m1", "m2", "m7", "m8", "m15"), _s("m10", "m14")},
    ("demo2", "HL3", "firstStage"): {_s("m7", "m8")},
    ("demo2", "HL3", "secondStage"): {_s("m11")},
    ("demo2", "HL3", "loadPart"): {_s("m2", "m3", "m4")},
    ("demo2", "HL3", "biasPart"): {_s("m1", "m5", "m6", "m9", "m10", "m12", "m13", "m14", "m15")},
    ("demo3", "HL1", "MosfetDiode"): {_s("m2", "m3", "m17", "m18")},
    ("demo3", "HL1", "load_cap"): {_s("c1", "c2")},
    ("demo4", "HL2", "CM"): {_s("m15", "m16", "m20", "m21"), _s("m7", "m8", "m9", "m10"),
                             _s("m1", "m11", "m18", "m2", "m3"), _s("m4", "m19")},
    ("demo5", "HL2", "Inverter"): {_s("m3", "m6", "m7")},
    ("demo6", "HL3", "thirdStage"): {_s("m9")},
    ("demo6", "HL3", "feedBack"): {_s("m13")},
}


def build(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in DEMOS.items():
        netlist = parse_netlist(text)
        anon, rename = anonymize(netlist)
        assert rename.is_identity(), f"{name} is not in anonymized form"
        truth = identify(netlist)
        for (demo, level, label), want in EXPECTED.items():
            if demo != name:
                continue
            got = {i.components for i in truth.level(level) if i.label == label}
            assert got == want, f"{demo} {level} {label}: {got} != {want}"
        (out_dir / f"{name}.sp").write_text(serialize_netlist(netlist))
        for level in LEVELS:
            (out_dir / f"{name}.{level.lower()}").write_text(dump_level(truth, level) + "\n")
        print(f"{name}: {len(netlist.mosfets)} transistors, {len(netlist.capacitors)} capacitors")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    default = Path(__file__).resolve().parents[1] / "src" / "analogid" / "data" / "demos"
    ap.add_argument("--out", type=Path, default=default)
    build(ap.parse_args().out)


if __name__ == "__main__":
    main()
