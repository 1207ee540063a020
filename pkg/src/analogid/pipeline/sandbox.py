"""Run identifier scripts in a child process and classify the outcome.

The child gets a fresh temporary working directory, a minimal environment,
a CPU-time limit and a socket module that refuses to connect. A small runner
loads the script as a module, calls ``findSubCircuit`` on the netlist read
from stdin, reports the result on a marker line, and then (in test mode)
runs the script as ``__main__`` so its embedded assertions execute.
"""
from __future__ import annotations

import json
import os
import shutil
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..annotations import CANONICAL_LEVEL, AnnotationSet, SubcircuitInstance

PASS, ASSERTION, SYNTAX, RUNTIME, TIMEOUT = (
    "pass", "assertion_failure", "syntax_error", "runtime_error", "timeout")
STATUSES = (PASS, ASSERTION, SYNTAX, RUNTIME, TIMEOUT)
RESULT_MARKER = "@@findSubCircuit@@"
DEFAULT_INTERPRETER = (sys.executable, "{script}")
_EXIT_STATUS = {0: PASS, 3: SYNTAX, 4: ASSERTION, 5: RUNTIME}
# the CPU limit ends a runaway child with one of these
_CPU_SIGNALS = {getattr(signal, "SIGXCPU", 24), signal.SIGKILL}

_RUNNER = r'''
import json, socket, sys, traceback

def _no_network(*a, **k):
    raise OSError("network access is disabled in the sandbox")

socket.socket = _no_network
socket.create_connection = _no_network

path, run_tests = sys.argv[1], sys.argv[2] == "1"
netlist = sys.stdin.read()
src = open(path).read()
try:
    code = compile(src, path, "exec")
except SyntaxError:
    traceback.print_exc()
    sys.exit(3)

def fail(exc):
    traceback.print_exc()
    sys.stdout.flush()
    sys.exit(4 if isinstance(exc, AssertionError) else 5)

module = {"__name__": "identifier", "__file__": path}
try:
    exec(code, module)
    result = module["findSubCircuit"](netlist)
    print("\n" + MARKER + " " + json.dumps(result, default=list), flush=True)
except BaseException as exc:
    fail(exc)

if run_tests:
    try:
        exec(code, {"__name__": "__main__", "__file__": path})
    except SystemExit as exc:
        if exc.code not in (None, 0):
            fail(exc)
    except BaseException as exc:
        fail(exc)
'''.replace("MARKER", repr(RESULT_MARKER))


class InterpreterUnavailable(RuntimeError):
    pass


class SandboxSetupFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class IdentifierScript:
    target: str
    source: str
    interpreter: tuple[str, ...] = DEFAULT_INTERPRETER


@dataclass
class ExecutionResult:
    status: str
    message: str = ""
    parsed_output: AnnotationSet | None = None
    returncode: int | None = None
    duration: float = 0.0
    raw_output: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == PASS


def parse_result(obj, allowed_labels: Sequence[str] | None = None) -> AnnotationSet | None:
    """Turn a ``[[label, [devices]], ...]`` result into annotations.

    Returns None when the shape is wrong or a label is not a known
    subcircuit label (or not in ``allowed_labels`` when given).
    """
    if not isinstance(obj, list):
        return None
    levels: dict[str, list[SubcircuitInstance]] = {}
    for item in obj:
        if isinstance(item, dict):
            item = (item.get("sub_circuit_name"), item.get("components"))
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            return None
        label, comps = item
        if not isinstance(label, str) or not isinstance(comps, (list, tuple)):
            return None
        if not comps or not all(isinstance(c, str) for c in comps):
            return None
        label = label.replace("\\_", "_")
        if label not in CANONICAL_LEVEL or (allowed_labels is not None and label not in allowed_labels):
            return None
        levels.setdefault(CANONICAL_LEVEL[label], []).append(SubcircuitInstance(label, frozenset(comps)))
    return AnnotationSet({k: tuple(v) for k, v in levels.items()})


def _limits(cpu_seconds: int):
    def apply():
        try:
            import resource
            resource.setrlimit(resource.RLIMIT_CPU, (cpu_seconds, cpu_seconds + 1))
        except (ImportError, ValueError, OSError):
            pass
    return apply


def _child_env(workdir: str) -> dict[str, str]:
    # the package root stays importable so scripts may reuse its parser
    pkg_root = str(Path(__file__).resolve().parents[2])
    return {"PATH": os.environ.get("PATH", "/usr/bin:/bin"), "HOME": workdir, "TMPDIR": workdir,
            "PYTHONPATH": pkg_root, "PYTHONDONTWRITEBYTECODE": "1", "PYTHONHASHSEED": "0",
            "LANG": "C.UTF-8"}


def _tail(text: str, limit: int = 4000) -> str:
    return text if len(text) <= limit else "...\n" + text[-limit:]


def execute_script(script: IdentifierScript, netlist_text: str, timeout: float = 30.0,
                   run_tests: bool = True, allowed_labels: Sequence[str] | None = None) -> ExecutionResult:
    """Execute ``script`` on ``netlist_text``; script failures come back as data."""
    exe = script.interpreter[0]
    if shutil.which(exe) is None and not os.path.exists(exe):
        raise InterpreterUnavailable(exe)
    try:
        workdir = tempfile.mkdtemp(prefix="identifier-")
    except OSError as exc:
        raise SandboxSetupFailure(str(exc)) from exc
    try:
        runner = Path(workdir) / "_runner.py"
        target = Path(workdir) / "identifier.py"
        runner.write_text(_RUNNER)
        target.write_text(script.source)
        argv = [a.replace("{script}", str(runner)) for a in script.interpreter]
        argv += [str(target), "1" if run_tests else "0"]
        start = time.monotonic()
        try:
            proc = subprocess.run(argv, input=netlist_text, capture_output=True, text=True, cwd=workdir,
                                  env=_child_env(workdir), timeout=timeout,
                                  preexec_fn=_limits(int(timeout) + 1) if os.name == "posix" else None)
        except subprocess.TimeoutExpired as exc:
            out = exc.stdout.decode() if isinstance(exc.stdout, bytes) else (exc.stdout or "")
            message = f"timed out after {timeout:g} s\n{_tail(out)}".replace(workdir, "<sandbox>")
            return ExecutionResult(TIMEOUT, message, duration=time.monotonic() - start)
        except OSError as exc:
            raise SandboxSetupFailure(f"cannot start {argv[0]}: {exc}") from exc
        duration = time.monotonic() - start
    finally:
        shutil.rmtree(workdir, ignore_errors=True)

    stdout_lines = []
    raw = None
    for line in proc.stdout.splitlines():
        if line.startswith(RESULT_MARKER):
            try:
                raw = json.loads(line[len(RESULT_MARKER):])
            except json.JSONDecodeError:
                raw = None
        else:
            stdout_lines.append(line)
    if proc.returncode in _EXIT_STATUS:
        status = _EXIT_STATUS[proc.returncode]
    elif proc.returncode < 0 and -proc.returncode in _CPU_SIGNALS:
        status = TIMEOUT
    else:
        status = RUNTIME
    message = "\n".join(part for part in (_tail("\n".join(stdout_lines).strip()),
                                          _tail(proc.stderr.strip())) if part)
    # keep diagnostics (and so repair prompts) independent of the temp dir
    message = message.replace(workdir, "<sandbox>")
    parsed = parse_result(raw, allowed_labels) if raw is not None else None
    return ExecutionResult(status, message, parsed, proc.returncode, duration,
                           raw if isinstance(raw, list) else [])
