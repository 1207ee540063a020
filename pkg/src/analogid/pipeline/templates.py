"""Prompt templates with ``{name}`` placeholders.

Only the names in ``PLACEHOLDERS`` are substituted, so literal braces in a
body (code samples, JSON) pass through untouched.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

PLACEHOLDERS = ("subcircuit", "netlist", "ground_truth", "instruction_1", "instruction_2",
                "instruction_final", "error_message", "test_cases", "labels")
_PLACEHOLDER_RE = re.compile(r"\{(" + "|".join(PLACEHOLDERS) + r")\}")

ENTRY_SIGNATURE = "def findSubCircuit(netlist: str)"
INSTRUCTION_OPEN, INSTRUCTION_CLOSE = "<instruction>", "</instruction>"


class MissingBinding(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"no binding for placeholder {{{self.name}}}"


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    body: str

    def placeholders(self) -> list[str]:
        return list(dict.fromkeys(_PLACEHOLDER_RE.findall(self.body)))


def render_prompt(template: PromptTemplate, bindings: Mapping[str, str]) -> str:
    def sub(match):
        name = match.group(1)
        if name not in bindings:
            raise MissingBinding(name)
        return str(bindings[name])

    return _PLACEHOLDER_RE.sub(sub, template.body)


INSTRUCTION_GEN = PromptTemplate("instruction_gen", f"""\
You are an analog circuit designer writing a procedure that other language models
will follow to find {{subcircuit}} in flat SPICE netlists they have never seen.

Below is one worked example: a netlist and the correct answer for it.

Netlist:
{{netlist}}

Correct answer:
{{ground_truth}}

Study the example and write a numbered, step-by-step procedure that reproduces the
correct answer from the netlist alone. Refer to connection patterns, not to the
particular device or net names of this example, so the procedure carries over to
other circuits. Format it in Markdown and put the whole procedure between
{INSTRUCTION_OPEN} and {INSTRUCTION_CLOSE}.
""")

INSTRUCTION_MERGE = PromptTemplate("instruction_merge", f"""\
Two procedures for finding {{subcircuit}} in flat SPICE netlists were written from
different examples. Combine them into one procedure that handles every case either
of them handles. Remove repeated steps, keep the more precise wording where they
overlap, and keep the result numbered and step-by-step.

Procedure A:
{{instruction_1}}

Procedure B:
{{instruction_2}}

Put the combined procedure between {INSTRUCTION_OPEN} and {INSTRUCTION_CLOSE}.
""")

CODE_GEN = PromptTemplate("code_gen", f"""\
You write Python. Turn the procedure below for finding {{subcircuit}} in a flat SPICE
netlist into a standalone script.

Procedure:
{{instruction_final}}

Requirements:
- Define the entry point exactly as

```python
{ENTRY_SIGNATURE}:
    \"\"\"Return a list of [label, [device names]] pairs, one per subcircuit found.\"\"\"
```

- Allowed labels: {{labels}}.
- Use only the Python standard library.
- Under `if __name__ == "__main__":` run the test case below, compare the result with
  the expected output as sets (order does not matter), print both together with
  the missing and extra groups when they differ, and finish with an assert.

Test case:
{{test_cases}}

Reply with the complete script in a single ```python fenced block.
""")

CODE_REPAIR = PromptTemplate("code_repair", """\
Running the script you just wrote produced this output:

```
{error_message}
```

Fix the script so the test passes, keeping the same entry point. Add checks or
prints that make the next failure easier to diagnose. Reply with the complete
revised script in a single ```python fenced block.
""")

# baseline prompts, bundled for rendering only
INSTRUCTION_FOLLOWING = PromptTemplate("instruction_following", """\
Find every {subcircuit} in the SPICE netlist below, using the procedure that follows.
Answer with a JSON list of objects, each with the keys "sub_circuit_name" (one of
{labels}) and "components" (device names). Put the JSON between <json> and </json>
and write nothing else.

Procedure:
{instruction_final}

Netlist:
{netlist}
""")

DIRECT_PROMPTING = PromptTemplate("direct_prompting", """\
Find every {subcircuit} in the SPICE netlist below.
Answer with a JSON list of objects, each with the keys "sub_circuit_name" (one of
{labels}) and "components" (device names). Put the JSON between <json> and </json>
and write nothing else.

Netlist:
{netlist}
""")

DIRECT_CODEGEN = PromptTemplate("direct_codegen", f"""\
You write Python. Write a standalone script that finds {{subcircuit}} in a flat SPICE
netlist.

Requirements:
- Define the entry point exactly as `{ENTRY_SIGNATURE}:` returning a list of
  [label, [device names]] pairs.
- Allowed labels: {{labels}}.
- Under `if __name__ == "__main__":` assert that the test case below passes.

Test case:
{{test_cases}}

Reply with the complete script in a single ```python fenced block.
""")

def prompt_kind(text: str) -> str | None:
    """Which template produced ``text``, judged by its fixed opening words."""
    for t in TEMPLATES.values():
        head = _PLACEHOLDER_RE.split(t.body, maxsplit=1)[0]
        if head and text.startswith(head):
            return t.id
    return None


TEMPLATES: dict[str, PromptTemplate] = {
    t.id: t for t in (INSTRUCTION_GEN, INSTRUCTION_MERGE, CODE_GEN, CODE_REPAIR,
                      INSTRUCTION_FOLLOWING, DIRECT_PROMPTING, DIRECT_CODEGEN)
}
