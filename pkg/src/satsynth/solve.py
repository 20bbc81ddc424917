"""External SAT solver driver and model decoding.

The solver is a child process run as ``<solver> [args] <file.cnf>``.  Exit
status 10 means SAT (model on stdout as ``v`` lines), 20 means UNSAT,
anything else is an error.
"""

from __future__ import annotations

import logging
import os
import shutil
import signal
import subprocess
import sysconfig
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence, Union

from .cnf import CnfError, parse_model

logger = logging.getLogger(__name__)

SAT_EXIT = 10
UNSAT_EXIT = 20


class SolverConfigError(RuntimeError):
    pass


class DecodeError(RuntimeError):
    """Model does not describe a well-formed circuit (an encoder bug)."""


def _bundled_kissat() -> str | None:
    # passagemath-kissat ships a standalone binary under sage_wheels/bin
    for key in ("purelib", "platlib"):
        cand = Path(sysconfig.get_paths()[key]) / "sage_wheels" / "bin" / "kissat"
        if cand.is_file() and os.access(cand, os.X_OK):
            return str(cand)
    return None


def find_solver() -> str | None:
    """``$SATSYNTH_SOLVER``, then kissat/cadical on PATH, then a bundled kissat."""
    env = os.environ.get("SATSYNTH_SOLVER")
    if env:
        return shutil.which(env) or (env if os.access(env, os.X_OK) else None)
    for name in ("kissat", "cadical"):
        hit = shutil.which(name)
        if hit:
            return hit
    return _bundled_kissat()


@dataclass(frozen=True)
class SolverConfig:
    executable: str
    args: tuple[str, ...] = ()
    timeout: float | None = None
    workdir: str | None = None

    def __post_init__(self):
        exe = shutil.which(self.executable) or self.executable
        if not (os.path.isfile(exe) and os.access(exe, os.X_OK)):
            raise SolverConfigError(f"solver {self.executable!r} is not an executable file")
        object.__setattr__(self, "executable", exe)
        object.__setattr__(self, "args", tuple(self.args))

    @classmethod
    def default(cls, **kw) -> SolverConfig:
        exe = find_solver()
        if exe is None:
            raise SolverConfigError("no SAT solver found; set SATSYNTH_SOLVER or put kissat on PATH")
        return cls(exe, **kw)


# --------------------------------------------------------------------- outcomes


@dataclass(frozen=True)
class Circuit:
    """Gate indices, step 0 applied first."""

    n: int
    steps: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Sat:
    circuit: Circuit
    phase: int = 0


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class Infeasible:
    reason: str


@dataclass(frozen=True)
class SolverError:
    detail: str


@dataclass(frozen=True)
class Timeout:
    seconds: float


SynthesisOutcome = Union[Sat, Unsat, Infeasible, SolverError, Timeout]


@dataclass
class RawOutcome:
    status: str  # "sat" | "unsat" | "error" | "timeout"
    model: dict[int, bool] | None = None
    output: str = ""
    detail: str = ""
    wall_time: float = 0.0
    returncode: int | None = None


def _kill_group(proc: subprocess.Popen) -> None:
    # wrapper scripts may leave children holding the output pipes
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()
    proc.wait()


def run_solver(
    cfg: SolverConfig,
    dimacs_path: str | os.PathLike,
    cancel: threading.Event | None = None,
    log_path: str | os.PathLike | None = None,
) -> RawOutcome:
    """Run the solver on a DIMACS file and classify its exit status."""
    path = Path(dimacs_path)
    if not path.is_file():
        return RawOutcome("error", detail=f"no such file: {path}")
    cmd = [cfg.executable, *cfg.args, str(path)]
    t0 = time.monotonic()
    try:
        proc = subprocess.Popen(
            cmd,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            cwd=cfg.workdir,
            start_new_session=True,
        )
    except OSError as exc:
        return RawOutcome("error", detail=f"cannot start solver: {exc}")

    out_chunks: list[str] = []
    err_chunks: list[str] = []
    readers = [
        threading.Thread(target=lambda: out_chunks.append(proc.stdout.read()), daemon=True),
        threading.Thread(target=lambda: err_chunks.append(proc.stderr.read()), daemon=True),
    ]
    for t in readers:
        t.start()
    timed_out = cancelled = False
    while True:
        try:
            proc.wait(timeout=0.05)
            break
        except subprocess.TimeoutExpired:
            pass
        if cfg.timeout is not None and time.monotonic() - t0 > cfg.timeout:
            timed_out = True
        elif cancel is not None and cancel.is_set():
            cancelled = True
        if timed_out or cancelled:
            _kill_group(proc)
            break
    for t in readers:
        t.join()
    wall = time.monotonic() - t0
    stdout = "".join(out_chunks)
    if log_path is not None:
        Path(log_path).write_text(stdout)
    if timed_out:
        return RawOutcome("timeout", output=stdout, wall_time=wall, detail=f"exceeded {cfg.timeout}s")
    if cancelled:
        return RawOutcome("error", output=stdout, wall_time=wall, detail="cancelled")
    rc = proc.returncode
    if rc == SAT_EXIT:
        try:
            model = parse_model(stdout)
        except CnfError as exc:
            return RawOutcome("error", output=stdout, wall_time=wall, returncode=rc, detail=f"bad model: {exc}")
        return RawOutcome("sat", model=model, output=stdout, wall_time=wall, returncode=rc)
    if rc == UNSAT_EXIT:
        return RawOutcome("unsat", output=stdout, wall_time=wall, returncode=rc)
    stderr = "".join(err_chunks).strip()
    return RawOutcome(
        "error", output=stdout, wall_time=wall, returncode=rc, detail=f"exit {rc}: {stderr[-500:]}"
    )


def decode_circuit(
    model: Mapping[int, bool],
    selectors: Sequence[Sequence[int]],
    n: int,
    phase_selectors: Mapping[int, int] | None = None,
) -> tuple[Circuit, int | None]:
    """Read the unique selected gate of every step (and phase, if encoded)."""
    steps = []
    for i, row in enumerate(selectors):
        try:
            chosen = [j for j, v in enumerate(row) if model[v]]
        except KeyError as exc:
            raise DecodeError(f"model lacks selector variable {exc.args[0]}") from None
        if len(chosen) != 1:
            raise DecodeError(f"step {i}: {len(chosen)} gates selected {chosen}")
        steps.append(chosen[0])
    phase = None
    if phase_selectors:
        on = [k for k, v in phase_selectors.items() if model.get(v)]
        if len(on) != 1:
            raise DecodeError(f"{len(on)} phase selectors true")
        phase = on[0]
    return Circuit(n, tuple(steps)), phase
