"""An offline stand-in for a language model.

``ReferenceProvider`` answers each pipeline prompt the way a well-behaved
model would: step lists for instruction prompts, the first procedure for
merges, and working identifier scripts for code prompts. The current-mirror
script is fully standalone; the others delegate to the package detectors.
Per-target failure modes make it easy to exercise the repair loop.
"""
from __future__ import annotations

import re
import textwrap
import threading
from typing import Mapping, Sequence

from .providers import Message, ProviderError
from .targets import Target, target_for_description
from .templates import INSTRUCTION_CLOSE, INSTRUCTION_OPEN, prompt_kind

INSTRUCTIONS = {
    "HL1": """\
1. Read every line that starts with `m` as a transistor: name, drain, gate, source, bulk, model.
2. Read every line that starts with `c` as a capacitor between its two nets.
3. Mark a transistor as diode-connected when its drain and gate are the same net.
4. Treat nets named like supply, vdd, ground, gnd or vss as rails and nets named like out or vout as outputs.
5. A capacitor between an output and a rail is a load capacitor.
6. A capacitor from an output to an internal net, or between two internal nets, is a compensation capacitor.
7. Report all diode-connected transistors as one MosfetDiode group and the capacitors as one load_cap and one compensation_cap group.""",
    "CM": """\
1. Read every transistor line: name, drain, gate, source, bulk and whether the model is nmos or pmos.
2. Split the transistors by channel type and treat each type on its own.
3. Group transistors of one type by gate net; only groups of two or more matter.
4. For each group with a common source and bulk, look for transistors of the same type whose source sits on a drain of the group. If every group drain carries one and they all share a gate, the group and these stacked transistors form one cascode mirror; mark both gate nets as used.
5. For every other gate group, keep it when all members share one source, the bulk of each member is tied to that source, and at least one member is diode-connected.
6. Drop duplicate groups.
7. Merge any two mirrors that contain the same diode-connected transistor, repeating until nothing changes.
8. Drop a mirror whose transistors are all inside another mirror and report the rest as CM groups.""",
    "DiffPair": """\
1. Find the input nets, named like in, in1, in2 or vref.
2. Look at every pair of same-type transistors whose gates sit on two different input nets.
3. Keep the pair when both transistors share the same source net and the same bulk net.
4. If two or more same-type transistors with a common gate drive that shared source, add them to the pair.
5. Report each pair as a DiffPair group.""",
    "Inverter": """\
1. For every net that is not a rail, collect the pmos paths from it up to supply and the nmos paths from it down to ground.
2. A path is one transistor, or two stacked transistors whose middle net connects to nothing else.
3. Each side needs at least one transistor whose gate is driven by a signal net rather than a rail, a bias net, or the net itself.
4. Every combination of a valid pmos path and a valid nmos path on the same net is an Inverter group.""",
    "HL3": """\
1. The differential pairs driven by the input nets form firstStage.
2. Starting from the drains of firstStage, follow transistors whose gate sits on the current net; the first layer that leads to an output is secondStage, later layers are thirdStage.
3. A transistor with its gate on the output and its drain on an earlier stage net is feedBack, as is a capacitor bridging the output and an earlier net that is neither a load nor a compensation capacitor.
4. Transistors fed from a bias net, directly or through current mirrors, are bias devices.
5. Remaining transistors whose drain lands on a stage output and whose source path reaches a rail are loadPart, together with their mirror partners.
6. Everything else is biasPart.""",
}

CM_SCRIPT = '''\
def findSubCircuit(netlist: str):
    """Return current mirrors as [["CM", [names...]], ...]."""
    mos = []
    for line in netlist.splitlines():
        tok = line.split()
        if len(tok) == 6 and tok[0][0] in "mM":
            model = tok[5].lower()
            kind = "nmos" if "nmos" in model else "pmos" if "pmos" in model else model
            mos.append(dict(name=tok[0], d=tok[1], g=tok[2], s=tok[3], b=tok[4], kind=kind))

    found, used = [], set()
    for kind in ("nmos", "pmos"):
        devs = [m for m in mos if m["kind"] == kind]
        groups = {}
        for m in devs:
            groups.setdefault(m["g"], []).append(m)
        # cascode pass
        for gate, grp in groups.items():
            if len(grp) < 2 or len({m["s"] for m in grp}) != 1 or len({m["b"] for m in grp}) != 1:
                continue
            drains = [m["d"] for m in grp]
            mains = [m for m in devs if m not in grp and m["s"] in drains]
            if len(mains) < 2 or len({m["g"] for m in mains}) != 1:
                continue
            if any(sum(m["s"] == n for m in mains) < drains.count(n) for n in drains):
                continue
            found.append({m["name"] for m in grp + mains})
            used.update({(kind, gate), (kind, mains[0]["g"])})
        # simple pass
        for gate, grp in groups.items():
            if len(grp) < 2 or (kind, gate) in used:
                continue
            src = grp[0]["s"]
            if all(m["s"] == src and m["b"] == src for m in grp) and any(m["d"] == m["g"] for m in grp):
                found.append({m["name"] for m in grp})

    unique = []
    for g in found:
        if g not in unique:
            unique.append(g)
    diodes = {m["name"] for m in mos if m["d"] == m["g"]}
    merged = True
    while merged:
        merged = False
        for i in range(len(unique)):
            for j in range(i + 1, len(unique)):
                if unique[i] & unique[j] & diodes:
                    unique[i] |= unique.pop(j)
                    merged = True
                    break
            if merged:
                break
    final = [g for g in unique if not any(g < h for h in unique)]
    return [["CM", sorted(g)] for g in final]
'''

WRAPPER_SCRIPT = '''\
from analogid.detectors import identify
from analogid.netlist import classify_nets, parse_netlist

LEVEL = {level!r}
LABELS = {labels!r}


def findSubCircuit(netlist: str):
    """Return {description} as [[label, [names...]], ...]."""
    parsed = parse_netlist(netlist)
    found = identify(parsed, classify_nets(parsed), levels=[LEVEL])
    return [[i.label, i.sorted_components()] for i in found.level(LEVEL) if i.label in LABELS]
'''

MAIN_BLOCK = '''

if __name__ == "__main__":
{test_case}
    actual = findSubCircuit(netlist)
    got = {{(label, frozenset(names)) for label, names in actual}}
    want = {{(label, frozenset(names)) for label, names in expected}}
    if got != want:
        print("Missing groups:", sorted((l, sorted(n)) for l, n in want - got))
        print("Extra groups:", sorted((l, sorted(n)) for l, n in got - want))
        print("Expected:", expected)
        print("Actual:", actual)
    assert got == want, "subcircuit identification does not match the expected output"
    print("All tests passed.")
'''


def identifier_source(target: Target, test_case: str) -> str:
    """A correct identifier script for ``target`` with ``test_case`` embedded."""
    if target.name == "CM":
        body = CM_SCRIPT
    else:
        body = WRAPPER_SCRIPT.format(level=target.level, labels=target.labels, description=target.description)
    return body + MAIN_BLOCK.format(test_case=textwrap.indent(test_case.strip("\n"), "    "))


def break_with_syntax_error(source: str) -> str:
    return source.replace("def findSubCircuit(netlist: str):", "def findSubCircuit(netlist: str)", 1)


def break_with_wrong_answer(source: str) -> str:
    """Keep the script runnable but drop the first reported group."""
    head, sep, main = source.partition('\n\nif __name__ == "__main__":')
    head = head.replace("def findSubCircuit(", "def _complete(", 1)
    head += "\n\n\ndef findSubCircuit(netlist: str):\n    return _complete(netlist)[1:]\n"
    return head + sep + main


def _test_case_from(prompt: str) -> str:
    m = re.search(r"Test case:\n(.*?)\n\nReply with", prompt, re.DOTALL)
    if not m:
        raise ProviderError("reference provider: no test case in the code prompt")
    return m.group(1)


class ReferenceProvider:
    """Deterministic offline provider.

    ``failures`` maps a target name to one of
    ``"syntax"`` (every script fails to parse),
    ``"assertion"`` (every script runs but misses a group), or
    ``"fix_on_repair"`` (first script misses a group, repairs are correct).
    """

    MODES = ("syntax", "assertion", "fix_on_repair")

    def __init__(self, failures: Mapping[str, str] | None = None):
        self.failures = dict(failures or {})
        bad = set(self.failures.values()) - set(self.MODES)
        if bad:
            raise ValueError(f"unknown failure modes {sorted(bad)}")
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, messages: Sequence[Message]) -> str:
        with self._lock:
            self.calls += 1
        prompt = messages[-1]["content"]
        kind = prompt_kind(prompt)
        if kind == "code_repair":
            first = next(m["content"] for m in messages if m["role"] == "user")
            return self._code(first, repair=True)
        target = target_for_description(prompt)
        if target is None:
            raise ProviderError("reference provider: cannot tell which subcircuit is asked for")
        if kind == "instruction_gen":
            return f"Here is the procedure.\n\n{INSTRUCTION_OPEN}\n{INSTRUCTIONS[target.name]}\n{INSTRUCTION_CLOSE}\n"
        if kind == "instruction_merge":
            m = re.search(r"Procedure A:\n(.*?)\n\nProcedure B:", prompt, re.DOTALL)
            return f"{INSTRUCTION_OPEN}\n{m.group(1).strip()}\n{INSTRUCTION_CLOSE}"
        if kind == "code_gen":
            return self._code(prompt, repair=False)
        raise ProviderError(f"reference provider: unsupported prompt kind {kind!r}")

    def _code(self, code_prompt: str, repair: bool) -> str:
        target = target_for_description(code_prompt)
        source = identifier_source(target, _test_case_from(code_prompt))
        mode = self.failures.get(target.name)
        if mode == "syntax":
            source = break_with_syntax_error(source)
        elif mode == "assertion" or (mode == "fix_on_repair" and not repair):
            source = break_with_wrong_answer(source)
        return f"```python\n{source}```\n"
