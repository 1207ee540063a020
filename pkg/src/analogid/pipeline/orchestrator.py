"""Two-phase identifier construction and codebase-driven inference.

Phase 1 asks the provider for one identification procedure per
demonstration and folds them pairwise into a single procedure. Phase 2 turns
that procedure into a script, runs it against one demonstration, and feeds
failures back within the same conversation until the script passes or the
retry budget runs out. Accepted and cautiously kept scripts form a codebase
that labels new netlists with no further provider calls.
"""
from __future__ import annotations

import json
import os
import random
import re
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..annotations import AnnotationSet, SubcircuitInstance, device_sort_key
from ..fileio import atomic_write
from ..netlist import Netlist, serialize_netlist
from .providers import Provider, ProviderError, provider_from_config
from .sandbox import (DEFAULT_INTERPRETER, STATUSES, ExecutionResult, IdentifierScript, execute_script)
from .targets import TARGETS, Target, get_target
from .templates import (CODE_GEN, CODE_REPAIR, INSTRUCTION_CLOSE, INSTRUCTION_GEN, INSTRUCTION_MERGE,
                        INSTRUCTION_OPEN, render_prompt)

ACCEPTED, CAUTIOUS, EMPTY = "accepted", "cautious", "empty"
_INSTRUCTION_RE = re.compile(re.escape(INSTRUCTION_OPEN) + r"(.*?)" + re.escape(INSTRUCTION_CLOSE),
                             re.DOTALL | re.IGNORECASE)
_FENCE_RE = re.compile(r"```[ \t]*(?:python|py)?[ \t]*\n(.*?)```", re.DOTALL | re.IGNORECASE)
_ENTRY_RE = re.compile(r"^def\s+findSubCircuit\s*\(\s*netlist\b", re.MULTILINE)
_STEP_RE = re.compile(r"^\s*(?:\d+[.)]|#+\s*step\b)", re.MULTILINE | re.IGNORECASE)
# status buckets for the error-type histogram
STATUS_GROUPS = {"assertion_failure": "Assertion", "syntax_error": "Syntax",
                 "runtime_error": "Others", "timeout": "Others"}


class MalformedReply(ValueError):
    pass


class ExecutionFailure(RuntimeError):
    def __init__(self, target: str, result: ExecutionResult):
        super().__init__(f"{target}: {result.status}")
        self.target = target
        self.result = result


@dataclass(frozen=True)
class Instruction:
    subcircuit: str
    body: str

    def steps(self) -> int:
        return len(_STEP_RE.findall(self.body))


@dataclass(frozen=True)
class Demo:
    id: str
    netlist: Netlist
    truth: AnnotationSet

    def instances(self, target: Target) -> list[SubcircuitInstance]:
        return [i for i in self.truth.level(target.level) if i.label in target.labels]


@dataclass
class PipelineConfig:
    demos: list[Demo]
    provider: Mapping | Provider = field(default_factory=lambda: {"kind": "reference"})
    retry_limit: int = 5
    timeout: float = 30.0
    seed: int = 0
    interpreter: tuple[str, ...] = DEFAULT_INTERPRETER
    workers: int = 1

    def validate(self, targets: Iterable[Target]) -> None:
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be non-negative")
        if not self.demos:
            raise ValueError("at least one demonstration is required")
        for t in targets:
            seen = {i.label for d in self.demos for i in d.instances(t)}
            missing = [l for l in t.labels if l not in seen]
            if missing:
                raise ValueError(f"demonstrations never show {missing} needed by target {t.name}")

    def build_provider(self) -> Provider:
        if isinstance(self.provider, Mapping):
            return provider_from_config(self.provider)
        return self.provider


@dataclass
class CodebaseEntry:
    target: str
    kind: str
    script: IdentifierScript | None = None
    retries: int = 0
    error: str = ""


@dataclass
class Codebase:
    entries: dict[str, CodebaseEntry] = field(default_factory=dict)

    def kinds(self) -> dict[str, str]:
        return {k: e.kind for k, e in self.entries.items()}

    def save(self, directory: str | os.PathLike) -> None:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        manifest = {}
        for name, entry in self.entries.items():
            item = {"kind": entry.kind, "retries": entry.retries, "error": entry.error}
            if entry.script is not None:
                atomic_write(out / f"{name}.py", entry.script.source)
                item["file"] = f"{name}.py"
                item["interpreter"] = list(entry.script.interpreter)
            manifest[name] = item
        atomic_write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, directory: str | os.PathLike) -> "Codebase":
        base = Path(directory)
        manifest = json.loads((base / "manifest.json").read_text())
        entries = {}
        for name, item in manifest.items():
            script = None
            if "file" in item:
                interp = tuple(item.get("interpreter") or DEFAULT_INTERPRETER)
                script = IdentifierScript(name, (base / item["file"]).read_text(), interp)
            entries[name] = CodebaseEntry(name, item["kind"], script, item.get("retries", 0), item.get("error", ""))
        return cls(entries)


class RunLog:
    """Line-delimited record of prompts, replies, executions and outcomes."""

    def __init__(self, records: Sequence[dict] = ()):
        self.records: list[dict] = list(records)
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        with self._lock:
            self.records.append(record)

    def extend(self, records: Iterable[dict]) -> None:
        with self._lock:
            self.records.extend(records)

    def calls(self, target: str | None = None) -> int:
        return sum(1 for r in self.records if r["event"] == "call" and target in (None, r["target"]))

    def executions(self, target: str | None = None) -> list[dict]:
        return [r for r in self.records if r["event"] == "execution" and target in (None, r["target"])]

    def status_counts(self) -> Counter:
        counts = Counter({s: 0 for s in STATUSES})
        counts.update(r["status"] for r in self.executions())
        return counts

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    def write(self, path: str | os.PathLike) -> None:
        atomic_write(Path(path), self.to_jsonl())


# ---- prompt bindings ----

def format_truth(instances: Iterable[SubcircuitInstance]) -> str:
    lines = [f"- {i.label}: {', '.join(i.sorted_components())}" for i in instances]
    return "\n".join(lines) if lines else "- none present"


def format_test_case(netlist: Netlist, instances: Iterable[SubcircuitInstance]) -> str:
    expected = sorted(([i.label, i.sorted_components()] for i in instances),
                      key=lambda p: (p[0], [device_sort_key(n) for n in p[1]]))
    return f'netlist = """\n{serialize_netlist(netlist)}"""\nexpected = {json.dumps(expected)}'


def extract_instruction(reply: str, subcircuit: str) -> Instruction:
    m = _INSTRUCTION_RE.search(reply)
    if not m or not m.group(1).strip():
        raise MalformedReply(f"no {INSTRUCTION_OPEN}...{INSTRUCTION_CLOSE} block in the reply")
    return Instruction(subcircuit, m.group(1).strip())


def extract_script(reply: str, target: str, interpreter: tuple[str, ...] = DEFAULT_INTERPRETER) -> IdentifierScript:
    blocks = _FENCE_RE.findall(reply)
    if not blocks:
        raise MalformedReply("no fenced code block in the reply")
    for block in blocks:
        if _ENTRY_RE.search(block):
            return IdentifierScript(target, block, tuple(interpreter))
    raise MalformedReply("code block does not define findSubCircuit(netlist)")


# ---- single steps ----

class _Session:
    """Provider access for one target, logging every exchange."""

    def __init__(self, provider: Provider, target: str):
        self.provider = provider
        self.target = target
        self.records: list[dict] = []

    def ask(self, phase: str, messages: list[dict]) -> str:
        try:
            reply = self.provider.complete(messages)
        except ProviderError:
            raise
        except Exception as exc:  # transport libraries raise all sorts of things
            raise ProviderError(str(exc)) from exc
        self.records.append({"event": "call", "target": self.target, "phase": phase,
                             "prompt": messages[-1]["content"], "reply": reply, "turns": len(messages)})
        return reply


def _session(provider, target: str) -> _Session:
    return provider if isinstance(provider, _Session) else _Session(provider, target)


def generate_instruction(provider, target: Target, demo: Demo) -> Instruction:
    prompt = render_prompt(INSTRUCTION_GEN, {"subcircuit": target.description,
                                             "netlist": serialize_netlist(demo.netlist),
                                             "ground_truth": format_truth(demo.instances(target))})
    reply = _session(provider, target.name).ask("instruction_gen", [{"role": "user", "content": prompt}])
    return extract_instruction(reply, target.name)


def merge_instructions(provider, target: Target, a: Instruction, b: Instruction) -> Instruction:
    if a.subcircuit != b.subcircuit:
        raise ValueError(f"cannot merge instructions for {a.subcircuit} and {b.subcircuit}")
    prompt = render_prompt(INSTRUCTION_MERGE, {"subcircuit": target.description,
                                               "instruction_1": a.body, "instruction_2": b.body})
    reply = _session(provider, target.name).ask("instruction_merge", [{"role": "user", "content": prompt}])
    return extract_instruction(reply, target.name)


def fold_instructions(provider, target: Target, instructions: Sequence[Instruction]) -> Instruction:
    """Merge in order: ((I1 + I2) + I3) + ...; a single instruction is returned as is."""
    if not instructions:
        raise ValueError("nothing to fold")
    acc = instructions[0]
    for nxt in instructions[1:]:
        acc = merge_instructions(provider, target, acc, nxt)
    return acc


def choose_demo(demos: Sequence[Demo], target: Target, seed: int) -> Demo:
    """Seeded pick among the demonstrations that contain the target."""
    pool = [d for d in demos if d.instances(target)] or list(demos)
    return random.Random(f"{seed}:{target.name}").choice(pool)


def generate_identifier(provider, instruction: Instruction, target: Target, demo: Demo,
                        interpreter: tuple[str, ...] = DEFAULT_INTERPRETER,
                        conversation: list[dict] | None = None) -> IdentifierScript:
    prompt = render_prompt(CODE_GEN, {"subcircuit": target.description, "instruction_final": instruction.body,
                                      "labels": ", ".join(target.labels),
                                      "test_cases": format_test_case(demo.netlist, demo.instances(target))})
    conv = conversation if conversation is not None else []
    conv.append({"role": "user", "content": prompt})
    reply = _session(provider, target.name).ask("code_gen", conv)
    conv.append({"role": "assistant", "content": reply})
    return extract_script(reply, target.name, interpreter)


def repair_identifier(provider, current: IdentifierScript, error: ExecutionResult, conversation: list[dict],
                      target: Target) -> IdentifierScript:
    """Ask for a fix inside the conversation that produced ``current``."""
    if error.ok:
        raise ValueError("repair requested for a script that passed")
    prompt = render_prompt(CODE_REPAIR, {"error_message": error.message or error.status})
    conversation.append({"role": "user", "content": prompt})
    reply = _session(provider, target.name).ask("code_repair", conversation)
    conversation.append({"role": "assistant", "content": reply})
    return extract_script(reply, target.name, current.interpreter)


# ---- whole pipeline ----

def _run_target(provider: Provider, config: PipelineConfig, target: Target) -> tuple[CodebaseEntry, list[dict]]:
    session = _Session(provider, target.name)
    records = session.records

    def execute(script: IdentifierScript, demo: Demo, attempt: int) -> ExecutionResult:
        result = execute_script(script, serialize_netlist(demo.netlist), timeout=config.timeout,
                                run_tests=True, allowed_labels=target.labels)
        records.append({"event": "execution", "target": target.name, "attempt": attempt,
                        "status": result.status, "message": result.message,
                        "parsable": result.parsed_output is not None})
        return result

    def finish(kind: str, script=None, retries: int = 0, error: str = "") -> tuple[CodebaseEntry, list[dict]]:
        records.append({"event": "result", "target": target.name, "kind": kind, "retries": retries,
                        "error": error})
        return CodebaseEntry(target.name, kind, script, retries, error), records

    try:
        instructions = [generate_instruction(session, target, d) for d in config.demos]
        final = fold_instructions(session, target, instructions)
        demo = choose_demo(config.demos, target, config.seed)
        conversation: list[dict] = []
        script = generate_identifier(session, final, target, demo, config.interpreter, conversation)
    except (ProviderError, MalformedReply) as exc:
        return finish(EMPTY, error=f"{type(exc).__name__}: {exc}")

    result = execute(script, demo, 0)
    retries = 0
    try:
        while not result.ok and retries < config.retry_limit:
            retries += 1
            try:
                script = repair_identifier(session, script, result, conversation, target)
            except MalformedReply as exc:
                # the attempt is spent; ask again with the same diagnostics
                records.append({"event": "malformed", "target": target.name, "attempt": retries,
                                "message": str(exc)})
                continue
            result = execute(script, demo, retries)
    except ProviderError as exc:
        return finish(EMPTY, error=f"ProviderError: {exc}", retries=retries)

    if result.ok:
        return finish(ACCEPTED, script, retries)
    if result.parsed_output is not None:
        return finish(CAUTIOUS, script, retries)
    return finish(EMPTY, retries=retries, error=f"last status {result.status}")


def run_pipeline(config: PipelineConfig, targets: Sequence[str | Target]) -> tuple[Codebase, RunLog]:
    resolved = [t if isinstance(t, Target) else get_target(t) for t in targets]
    config.validate(resolved)
    provider = config.build_provider()
    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        outcomes = list(pool.map(lambda t: _run_target(provider, config, t), resolved))
    codebase, log = Codebase(), RunLog()
    # merge in target order so the log does not depend on scheduling
    for target, (entry, records) in zip(resolved, outcomes):
        codebase.entries[target.name] = entry
        log.extend(records)
    return codebase, log


def identify_with_codebase(codebase: Codebase, netlist: Netlist,
                           timeout: float = 30.0) -> tuple[AnnotationSet, list[ExecutionFailure]]:
    """Label ``netlist`` with the stored scripts; no provider is involved."""
    text = serialize_netlist(netlist)
    found = AnnotationSet()
    failures = []
    for name, entry in codebase.entries.items():
        if entry.kind == EMPTY or entry.script is None:
            continue
        allowed = TARGETS[name].labels if name in TARGETS else None
        result = execute_script(entry.script, text, timeout=timeout, run_tests=False, allowed_labels=allowed)
        if result.ok and result.parsed_output is not None:
            found = found.union(result.parsed_output)
        else:
            if result.ok:
                result.status, result.message = "runtime_error", "output is not a list of [label, devices] pairs"
            failures.append(ExecutionFailure(name, result))
    return found, failures


def retry_summary(codebase: Codebase, retry_limit: int) -> dict[str, tuple[int, int]]:
    """Per level: (retries used, retries allowed) over the targets at that level."""
    out: dict[str, list[int]] = {}
    for name, entry in codebase.entries.items():
        level = get_target(name).level
        used, allowed = out.setdefault(level, [0, 0])
        out[level] = [used + entry.retries, allowed + retry_limit]
    return {k: (v[0], v[1]) for k, v in sorted(out.items())}


def format_retry_summary(summary: Mapping[str, tuple[int, int]]) -> str:
    return "\n".join(f"{level} {used}/{allowed}" for level, (used, allowed) in summary.items())


def status_histogram(log: RunLog) -> dict[str, int]:
    counts = log.status_counts()
    grouped = Counter({"Assertion": 0, "Syntax": 0, "Others": 0})
    for status, n in counts.items():
        if status in STATUS_GROUPS:
            grouped[STATUS_GROUPS[status]] += n
    return {**counts, **grouped}


def format_status_histogram(log: RunLog) -> str:
    hist = status_histogram(log)
    total = sum(hist[s] for s in STATUSES)
    lines = [f"{'status':<18}{'count':>6}"]
    lines += [f"{s:<18}{hist[s]:>6}" for s in STATUSES]
    lines.append(f"{'executions':<18}{total:>6}")
    failures = sum(hist[g] for g in ("Assertion", "Syntax", "Others"))
    for g in ("Assertion", "Syntax", "Others"):
        share = hist[g] / failures if failures else 0.0
        lines.append(f"{g:<18}{hist[g]:>6}  {share:6.1%}")
    return "\n".join(lines)
