"""Regression fixtures that bind published numbers to CLI invocations.

A fixture is a list of runs.  A run is either a CLI invocation (``argv``,
executed in-process with ``--json`` output) or a named library probe for
quantities the CLI does not print.  Each run carries checks on dotted keys
of its JSON result:

* ``{"key": ..., "expected": x, "tol": t}`` numeric, absolute tolerance;
* ``{"key": ..., "equals": v}`` exact match;
* ``{"key": ..., "less_than_key": k}`` numeric ordering;
* ``{"exit": code}`` and ``{"stderr_contains": text}`` for failing runs.

Placeholders ``{systems}`` and ``{out}`` in ``argv`` expand to the bundled
system directory and a scratch directory.
"""

from __future__ import annotations

import contextlib
import io
import json
import math
import tempfile
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import analytic2
from .distances import kl_coherence_split
from .quench import coherent_partner
from .system import LevelSystem, dipole_rates, thermal_state

DEFAULT_TOL = 5e-3


def systems_dir() -> Path:
    return Path(str(resources.files("equiquench") / "data" / "systems"))


def default_fixture_file() -> Path:
    return Path(str(resources.files("equiquench") / "data" / "fixtures.json"))


def _probe_hamiltonian_eigenvalues(omega0: float = 1.0) -> dict:
    h = LevelSystem.two_level(omega0).hamiltonian()
    return {"eigenvalues": sorted(np.linalg.eigvalsh(h).tolist())}


def _probe_dipole_ratio(amplitude: float, omega0: float, beta: float) -> dict:
    g01, g10 = dipole_rates(amplitude, omega0, beta)
    return {"ratio": g10 / g01, "boltzmann": math.exp(-beta * abs(omega0))}


def _probe_delta_critical(omega0: float = 1.0, beta: float = 1.0, gamma01: float = 1.0) -> dict:
    p = analytic2.TwoLevelParams(omega0=omega0, beta=beta, gamma01=gamma01)
    return {"delta_c": analytic2.delta_critical(p)}


def _probe_coherence_split(target: float = 0.1, beta: float = 1.0, omega0: float = 1.0) -> dict:
    p = analytic2.TwoLevelParams(omega0=omega0, beta=beta, beta0=beta)
    system = p.system()
    r = coherent_partner(system, "kl", target)
    coherence, diagonal = kl_coherence_split(p.replace(r=r).initial_state(), thermal_state(system))
    return {"coherence_part": coherence, "diagonal_part": diagonal}


def _probe_gamma_order(beta0_hot: float, beta0_cold: float, beta: float = 1.0) -> dict:
    return {"gamma_hot": analytic2.gamma_prefactor(beta0_hot, beta),
            "gamma_cold": analytic2.gamma_prefactor(beta0_cold, beta)}


def _probe_existence(beta: float = 1.0, omega0: float = 1.0) -> dict:
    lim = analytic2.equidistant_existence(beta, omega0)
    return {"limit_hot": lim.limit_hot, "limit_cold": lim.limit_cold,
            "pair_guaranteed_up_to": lim.pair_guaranteed_up_to, "cold_le_hot": lim.cold_le_hot}


PROBES = {
    "hamiltonian_eigenvalues": _probe_hamiltonian_eigenvalues,
    "dipole_ratio": _probe_dipole_ratio,
    "delta_critical": _probe_delta_critical,
    "coherence_split": _probe_coherence_split,
    "gamma_order": _probe_gamma_order,
    "existence": _probe_existence,
}


@dataclass
class CheckOutcome:
    description: str
    passed: bool


@dataclass
class FixtureResult:
    name: str
    provenance: str
    checks: list[CheckOutcome] = field(default_factory=list)
    seconds: float = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)


def lookup(data, dotted: str):
    for part in dotted.split("."):
        if isinstance(data, list):
            data = data[int(part)]
        else:
            data = data[part]
    return data


def _run_cli(argv: list[str]) -> tuple[int, dict | None, str]:
    from .cli import main

    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    text = out.getvalue()
    try:
        data = json.loads(text) if text.strip() else None
    except json.JSONDecodeError:
        data = None
    return code, data, err.getvalue()


def _check(check: dict, code: int, data, stderr: str) -> CheckOutcome:
    if "exit" in check:
        return CheckOutcome(f"exit == {check['exit']} (got {code})", code == check["exit"])
    if "stderr_contains" in check:
        text = check["stderr_contains"]
        return CheckOutcome(f"stderr contains {text!r}", text in stderr)
    key = check["key"]
    try:
        value = lookup(data, key)
    except (KeyError, IndexError, TypeError, ValueError):
        return CheckOutcome(f"{key}: missing from output", False)
    if "expected" in check:
        tol = check.get("tol", DEFAULT_TOL)
        ok = abs(float(value) - check["expected"]) <= tol
        return CheckOutcome(f"{key} = {float(value):.6g} vs {check['expected']} +/- {tol:g}", ok)
    if "equals" in check:
        return CheckOutcome(f"{key} = {value!r} vs {check['equals']!r}", value == check["equals"])
    if "less_than_key" in check:
        other = lookup(data, check["less_than_key"])
        return CheckOutcome(f"{key} ({value:.6g}) < {check['less_than_key']} ({other:.6g})",
                            float(value) < float(other))
    raise ValueError(f"unrecognised check {check!r}")


def run_fixture(fixture: dict, scratch: Path) -> FixtureResult:
    result = FixtureResult(fixture["name"], fixture.get("provenance", ""))
    start = time.perf_counter()
    try:
        for k, run in enumerate(fixture["runs"]):
            if "probe" in run:
                code, data, stderr = 0, PROBES[run["probe"]](**run.get("args", {})), ""
            else:
                out = scratch / f"{fixture['name']}_{k}"
                argv = [a.format(systems=systems_dir(), out=out) for a in run["argv"]]
                if "--json" not in argv and argv[0] not in ("validate", "fixtures"):
                    argv.append("--json")
                code, data, stderr = _run_cli(argv)
            for check in run["checks"]:
                result.checks.append(_check(check, code, data, stderr))
    except Exception as exc:  # a broken fixture is reported, not raised
        result.error = f"{type(exc).__name__}: {exc}"
    result.seconds = time.perf_counter() - start
    return result


def load_fixtures(path=None) -> list[dict]:
    path = Path(path) if path is not None else default_fixture_file()
    return json.loads(path.read_text())["fixtures"]


def run_fixtures(path=None) -> list[FixtureResult]:
    fixtures = load_fixtures(path)
    with tempfile.TemporaryDirectory(prefix="equiquench-fixtures-") as tmp:
        return [run_fixture(f, Path(tmp)) for f in fixtures]


def format_table(results: list[FixtureResult]) -> str:
    lines = []
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        lines.append(f"{flag}  {r.name:<24} {r.seconds:7.2f}s  [{r.provenance}]")
        if r.error:
            lines.append(f"        error: {r.error}")
        for c in r.checks:
            lines.append(f"        {'ok ' if c.passed else 'BAD'} {c.description}")
    ok = sum(r.passed for r in results)
    lines.append(f"{ok}/{len(results)} fixtures passed")
    return "\n".join(lines)
