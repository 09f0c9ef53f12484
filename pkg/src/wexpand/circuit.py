"""Circuit files: JSON descriptions of inputs, optical elements and a coincidence pattern.

Schema::

    {
      "inputs":   [<input>, ...],            # tensored together in order
      "elements": [<element>, ...],          # applied in order
      "postselect": {"<mode>": count, ...},  # optional, default {}
      "target": "w_3" | {"name": "w", "n": 3, "modes": [4, 5, 6]},   # optional
      "expect": {"probability": "3/16", "fidelity": 1}               # optional, for --check
    }

Inputs: ``"vacuum"``; ``{"seed": "epr", "modes": [a, b]}``;
``{"seed": "two_h" | "hv", "mode": m}``; ``{"seed": "single", "mode": m, "pol": "H"}``;
``{"seed": "w" | "ghz", "n": n, "modes": [...]}``; ``{"occ": {"<mode>": {"H": n, "V": m}}}``;
``{"state": [<canonical state records>]}``.

Elements: ``{"bs": [a, b, c, d]}``, ``{"split": [m, c, d]}``, ``{"hwp_ps": m}``,
``{"rot": [m, theta]}``, ``{"flip": m}``.
"""

from __future__ import annotations

import json
import math
import re
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import fock
from .fock import PhotonicState
from .gates import epr_pair, ghz_target, hv_pair, two_h, w_target

SEEDS = ("vacuum", "epr", "two_h", "hv", "single", "w", "ghz")
ELEMENTS = ("bs", "split", "hwp_ps", "rot", "flip")


class CircuitError(ValueError):
    """The circuit file is malformed or refers to modes that do not resolve."""


def bundled(name: str) -> Path:
    """Path of a circuit file shipped with the package (``w3.json``, ``w4.json``, ...)."""
    return Path(str(resources.files("wexpand") / "circuits" / name))


def bundled_names() -> list[str]:
    return sorted(p.name for p in resources.files("wexpand").joinpath("circuits").iterdir()
                  if p.name.endswith(".json"))


def _line_index(text: str) -> dict[tuple, int]:
    """Line number of each top-level key and of each item in top-level arrays."""
    dec = json.JSONDecoder()
    lines: dict[tuple, int] = {}
    for m in re.finditer(r'"(inputs|elements|postselect|target|expect)"\s*:\s*', text):
        key = m.group(1)
        lines[(key,)] = text.count("\n", 0, m.start()) + 1
        pos = m.end()
        if text[pos:pos + 1] != "[":
            continue
        pos += 1
        idx = 0
        while True:
            while pos < len(text) and text[pos] in " \t\r\n,":
                pos += 1
            if pos >= len(text) or text[pos] == "]":
                break
            lines[(key, idx)] = text.count("\n", 0, pos) + 1
            try:
                _, pos = dec.raw_decode(text, pos)
            except json.JSONDecodeError:
                break
            idx += 1
    return lines


class _Ctx:
    def __init__(self, lines: dict[tuple, int] | None = None):
        self.lines = lines or {}

    def fail(self, path: tuple, msg: str):
        where = path[0] + "".join(f"[{p}]" for p in path[1:])
        line = self.lines.get(path) or self.lines.get(path[:1])
        prefix = f"line {line}: " if line else ""
        raise CircuitError(f"{prefix}{where}: {msg}")


def _int(ctx, path, v, what="mode"):
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        ctx.fail(path, f"{what} must be a non-negative integer, got {v!r}")
    return v


def _build_input(ctx: _Ctx, path, spec) -> PhotonicState:
    if spec == "vacuum":
        return fock.vacuum()
    if not isinstance(spec, dict):
        ctx.fail(path, f"input must be 'vacuum' or an object, got {spec!r}")
    if "occ" in spec:
        try:
            return fock.state_from_records([{"occ": spec["occ"], "amp": [1, 0]}])
        except (KeyError, ValueError, TypeError, AttributeError) as exc:
            ctx.fail(path, f"bad occupation: {exc}")
    if "state" in spec:
        try:
            state = fock.state_from_records(spec["state"])
        except (KeyError, ValueError, TypeError, AttributeError) as exc:
            ctx.fail(path, f"bad state records: {exc}")
        if not state.normalized:
            ctx.fail(path, "state records are not normalized")
        return state
    seed = spec.get("seed")
    if seed == "vacuum":
        return fock.vacuum()
    if seed == "epr":
        modes = spec.get("modes")
        if not isinstance(modes, list) or len(modes) != 2 or modes[0] == modes[1]:
            ctx.fail(path, "epr needs two distinct modes")
        return epr_pair(*(_int(ctx, path, m) for m in modes))
    if seed in ("two_h", "hv", "single"):
        mode = _int(ctx, path, spec.get("mode"))
        if seed == "two_h":
            return two_h(mode)
        if seed == "hv":
            return hv_pair(mode)
        pol = spec.get("pol", "H")
        if pol not in ("H", "V"):
            ctx.fail(path, f"pol must be H or V, got {pol!r}")
        return fock.make_fock(fock.occ((mode, pol, 1)))
    if seed in ("w", "ghz"):
        n = _int(ctx, path, spec.get("n"), "n")
        modes = spec.get("modes", list(range(n)))
        if not isinstance(modes, list) or len(modes) != n or len(set(modes)) != n:
            ctx.fail(path, f"{seed} needs {n} distinct modes")
        for m in modes:
            _int(ctx, path, m)
        try:
            q = w_target(n, modes) if seed == "w" else ghz_target(n, modes)
        except ValueError as exc:
            ctx.fail(path, str(exc))
        return fock.encode_qubits(q)
    ctx.fail(path, f"unknown seed {seed!r}; expected one of {SEEDS}")


def _apply_element(ctx: _Ctx, path, el, state: PhotonicState) -> PhotonicState:
    if not isinstance(el, dict) or len(el) != 1:
        ctx.fail(path, "element must be an object with exactly one key")
    (kind, args), = el.items()
    try:
        if kind == "bs":
            if not isinstance(args, list) or len(args) != 4:
                ctx.fail(path, "bs takes [in_a, in_b, out_c, out_d]")
            return fock.apply_beamsplitter(state, *(_int(ctx, path, a) for a in args))
        if kind == "split":
            if not isinstance(args, list) or len(args) != 3:
                ctx.fail(path, "split takes [in_m, out_c, out_d]")
            return fock.apply_bs_split(state, *(_int(ctx, path, a) for a in args))
        if kind == "hwp_ps":
            return fock.apply_half_wave_ps(state, _int(ctx, path, args))
        if kind == "flip":
            return fock.apply_pol_flip(state, _int(ctx, path, args))
        if kind == "rot":
            if not isinstance(args, list) or len(args) != 2 or not isinstance(args[1], (int, float)):
                ctx.fail(path, "rot takes [mode, theta]")
            return fock.apply_pol_rotation(state, _int(ctx, path, args[0]), float(args[1]))
    except fock.ModeCollisionError as exc:
        ctx.fail(path, str(exc))
    except CircuitError:
        raise
    except ValueError as exc:
        ctx.fail(path, str(exc))
    ctx.fail(path, f"unknown element {kind!r}; expected one of {ELEMENTS}")


def _parse_target(ctx: _Ctx, spec, default_modes):
    if spec is None:
        return None
    if isinstance(spec, str):
        m = re.fullmatch(r"(w|ghz)_(\d+)", spec)
        if not m:
            ctx.fail(("target",), f"target must look like w_3 or ghz_4, got {spec!r}")
        name, n, modes = m.group(1), int(m.group(2)), None
    elif isinstance(spec, dict):
        name, n, modes = spec.get("name"), spec.get("n"), spec.get("modes")
        if name not in ("w", "ghz"):
            ctx.fail(("target",), f"unknown target {name!r}")
        _int(ctx, ("target",), n, "n")
    else:
        ctx.fail(("target",), "target must be a string or object")
    modes = list(modes) if modes is not None else list(default_modes)
    if len(modes) != n:
        ctx.fail(("target",), f"target {name}_{n} needs {n} modes, got {modes}")
    try:
        return w_target(n, modes) if name == "w" else ghz_target(n, modes)
    except ValueError as exc:
        ctx.fail(("target",), str(exc))


def _frac(v) -> float:
    return float(Fraction(v)) if isinstance(v, str) else float(v)


def load(source) -> tuple[dict, _Ctx]:
    """Parse a path, JSON text or already-decoded dict."""
    if isinstance(source, dict):
        return source, _Ctx()
    if isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        text = Path(source).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise CircuitError("line 1: circuit file must hold a JSON object")
    return data, _Ctx(_line_index(text))


def run_circuit(source) -> dict:
    """Evaluate a circuit file and return ``probability``, ``conditional_state`` and ``fidelity``."""
    data, ctx = load(source)
    unknown = set(data) - {"inputs", "elements", "postselect", "target", "expect", "description"}
    if unknown:
        ctx.fail((sorted(unknown)[0],), "unknown top-level key")
    inputs = data.get("inputs", ["vacuum"])
    elements = data.get("elements", [])
    if not isinstance(inputs, list) or not isinstance(elements, list):
        ctx.fail(("inputs",), "inputs and elements must be lists")
    state = fock.vacuum()
    for i, spec in enumerate(inputs):
        part = _build_input(ctx, ("inputs", i), spec)
        try:
            state = fock.tensor(state, part)
        except fock.ModeCollisionError as exc:
            ctx.fail(("inputs", i), str(exc))
    for i, el in enumerate(elements):
        state = _apply_element(ctx, ("elements", i), el, state)

    ps = data.get("postselect", {})
    if not isinstance(ps, dict):
        ctx.fail(("postselect",), "postselect must map mode to count")
    try:
        pattern = fock.PostSelectPattern({int(m): n for m, n in ps.items()})
    except (TypeError, ValueError) as exc:
        ctx.fail(("postselect",), str(exc))
    prob, cond = fock.post_select(state, pattern)

    result = {"probability": prob, "conditional_state": fock.state_to_records(cond)}
    target = _parse_target(ctx, data.get("target"), sorted(cond.modes))
    if target is not None:
        result["fidelity"] = fock.fidelity(fock.encode_qubits(target), cond) if prob > 0 else 0.0
    if "expect" in data:
        exp = data["expect"]
        try:
            result["expect"] = {k: _frac(v) for k, v in exp.items()}
        except (TypeError, ValueError, ZeroDivisionError, AttributeError) as exc:
            ctx.fail(("expect",), str(exc))
    return result


def check_result(result: dict, tol_prob: float = fock.TOL_PROB) -> list[str]:
    """Mismatches between a run result and its ``expect`` block."""
    problems = []
    for key, want in result.get("expect", {}).items():
        got = result.get(key)
        if got is None or not math.isclose(got, want, rel_tol=0, abs_tol=tol_prob):
            problems.append(f"{key}: expected {want}, got {got}")
    return problems
