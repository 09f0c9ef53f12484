"""Second-quantized states of polarized spatial modes.

A basis ket is an :class:`OccupationVector` (photon counts per
``(mode, polarization)`` slot) and a :class:`PhotonicState` is a sparse map
from basis kets to complex amplitudes. Every linear-optical element is a
linear substitution of creation operators, so all of them go through
:func:`_substitute`, which expands each basis term as a polynomial in the
output creation operators.

States are immutable; every operation returns a new state.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

PRUNE = 1e-14
TOL_AMP = 1e-12
TOL_PROB = 1e-9
NORM_TOL = 1e-9

# Upper bound on basis terms held by a single state.
MAX_TERMS = 500_000


class ModeCollisionError(ValueError):
    """An element's output mode is already occupied by an unrelated mode."""


class EncodingError(ValueError):
    """A state does not carry exactly one photon per listed mode."""


class ResourceLimitError(RuntimeError):
    """A state grew past :data:`MAX_TERMS` basis terms."""


class Polarization(enum.IntEnum):
    H = 0
    V = 1

    @classmethod
    def parse(cls, value: Polarization | str | int) -> Polarization:
        if isinstance(value, str):
            return cls[value.upper()]
        return cls(value)


H = Polarization.H
V = Polarization.V

Slot = tuple[int, Polarization]


@dataclass(frozen=True)
class OccupationVector:
    """Photon counts per ``(mode, polarization)`` slot.

    Stored as a sorted tuple of ``(mode, pol, count)`` with no zero counts,
    so equality and hashing are slot-wise and the ordering is canonical
    (modes ascending, H before V).
    """

    slots: tuple[tuple[int, Polarization, int], ...] = ()

    def __post_init__(self):
        merged: dict[Slot, int] = {}
        for mode, pol, count in self.slots:
            if mode < 0 or count < 0:
                raise ValueError(f"invalid slot ({mode}, {pol}, {count})")
            key = (int(mode), Polarization.parse(pol))
            merged[key] = merged.get(key, 0) + int(count)
        canon = tuple((m, p, n) for (m, p), n in sorted(merged.items()) if n)
        object.__setattr__(self, "slots", canon)

    @classmethod
    def of(cls, counts: Mapping[tuple[int, Polarization | str], int] | None = None) -> OccupationVector:
        counts = counts or {}
        return cls(tuple((m, p, n) for (m, p), n in counts.items()))

    def as_dict(self) -> dict[Slot, int]:
        return {(m, p): n for m, p, n in self.slots}

    def count(self, mode: int, pol: Polarization | None = None) -> int:
        """Photons in ``mode``, either in one polarization or in both."""
        return sum(n for m, p, n in self.slots if m == mode and (pol is None or p == pol))

    @property
    def total(self) -> int:
        return sum(n for _, _, n in self.slots)

    @property
    def modes(self) -> frozenset[int]:
        return frozenset(m for m, _, _ in self.slots)

    def sort_key(self):
        return self.slots

    def __str__(self):
        if not self.slots:
            return "|0>"
        by_mode: dict[int, list[str]] = {}
        for m, p, n in self.slots:
            by_mode.setdefault(m, []).append(f"{n}{p.name}")
        return "".join(f"|{' '.join(v)}>_{m}" for m, v in by_mode.items())


def occ(*slots: tuple[int, str | Polarization, int]) -> OccupationVector:
    """Shorthand: ``occ((2, "H", 2))`` is the ket with two H photons in mode 2."""
    return OccupationVector(tuple(slots))


class PhotonicState:
    """Sparse superposition of occupation-number kets.

    ``normalized`` records whether the state is declared to be a unit
    vector; creating photons or projecting drops the flag.
    """

    __slots__ = ("_amps", "normalized")

    def __init__(self, amplitudes: Mapping[OccupationVector, complex] | None = None,
                 normalized: bool = False):
        amps = {}
        for key, amp in (amplitudes or {}).items():
            amp = complex(amp)
            if abs(amp) >= PRUNE:
                amps[key] = amp
        if len(amps) > MAX_TERMS:
            raise ResourceLimitError(f"state has {len(amps)} terms (limit {MAX_TERMS})")
        self._amps = amps
        self.normalized = normalized
        if normalized and abs(self.norm_sq() - 1.0) > NORM_TOL:
            raise ValueError(f"state flagged normalized has norm^2 {self.norm_sq()!r}")

    @property
    def amplitudes(self) -> dict[OccupationVector, complex]:
        return dict(self._amps)

    def __len__(self):
        return len(self._amps)

    def __iter__(self):
        return iter(self.terms())

    def __getitem__(self, key: OccupationVector) -> complex:
        return self._amps.get(key, 0j)

    def terms(self) -> list[tuple[OccupationVector, complex]]:
        """Basis terms in canonical order."""
        return sorted(self._amps.items(), key=lambda kv: kv[0].sort_key())

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._amps.values()))

    @property
    def modes(self) -> frozenset[int]:
        out: set[int] = set()
        for key in self._amps:
            out |= key.modes
        return frozenset(out)

    def photon_numbers(self) -> set[int]:
        return {key.total for key in self._amps}

    def scaled(self, factor: complex) -> PhotonicState:
        return PhotonicState({k: a * factor for k, a in self._amps.items()})

    def renormalized(self) -> PhotonicState:
        nrm = math.sqrt(self.norm_sq())
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return PhotonicState({k: a / nrm for k, a in self._amps.items()}, normalized=True)

    def __add__(self, other: PhotonicState) -> PhotonicState:
        amps = dict(self._amps)
        for k, a in other._amps.items():
            amps[k] = amps.get(k, 0j) + a
        return PhotonicState(amps)

    def __sub__(self, other: PhotonicState) -> PhotonicState:
        return self + other.scaled(-1)

    def __mul__(self, factor: complex) -> PhotonicState:
        return self.scaled(factor)

    __rmul__ = __mul__

    def allclose(self, other: PhotonicState, atol: float = TOL_AMP) -> bool:
        keys = set(self._amps) | set(other._amps)
        return all(abs(self[k] - other[k]) <= atol for k in keys)

    def __repr__(self):
        body = " + ".join(f"({a.real:+.6g}{a.imag:+.6g}j){k}" for k, a in self.terms()[:8])
        more = "" if len(self) <= 8 else f" + ... ({len(self)} terms)"
        return f"PhotonicState({body or '0'}{more})"


@dataclass(frozen=True)
class PostSelectPattern:
    """Required total photon count (H+V) per constrained spatial mode."""

    constraints: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        cons = {int(m): int(n) for m, n in dict(self.constraints).items()}
        if any(n < 0 for n in cons.values()):
            raise ValueError("constrained counts must be non-negative")
        object.__setattr__(self, "constraints", cons)

    def matches(self, key: OccupationVector) -> bool:
        return all(key.count(m) == n for m, n in self.constraints.items())


@dataclass
class QubitState:
    """Dense polarization-qubit vector; qubit ``i`` lives in ``mode_order[i]``.

    Basis index bit ``n-1-i`` holds qubit ``i`` (qubit 0 is the leftmost
    label), with H encoded as 0 and V as 1.
    """

    amps: np.ndarray
    mode_order: list[int]

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        self.mode_order = list(self.mode_order)
        if self.amps.shape != (2 ** self.n,):
            raise ValueError(f"expected {2 ** self.n} amplitudes, got {self.amps.shape}")
        if abs(np.vdot(self.amps, self.amps).real - 1.0) > NORM_TOL:
            raise ValueError("qubit state is not normalized")

    @property
    def n(self) -> int:
        return len(self.mode_order)

    def fidelity(self, other: QubitState) -> float:
        if other.n != self.n:
            raise ValueError("qubit counts differ")
        return float(abs(np.vdot(self.amps, other.amps)) ** 2)

    def permuted(self, perm: Sequence[int]) -> QubitState:
        """Reorder qubits so that new qubit ``i`` is old qubit ``perm[i]``."""
        t = self.amps.reshape([2] * self.n).transpose(list(perm))
        return QubitState(t.reshape(-1), [self.mode_order[p] for p in perm])


# -- constructors -------------------------------------------------------------

def make_fock(occupation: OccupationVector | Mapping | None = None) -> PhotonicState:
    if not isinstance(occupation, OccupationVector):
        occupation = OccupationVector.of(occupation)
    return PhotonicState({occupation: 1.0}, normalized=True)


def vacuum() -> PhotonicState:
    return make_fock(OccupationVector())


def apply_create(state: PhotonicState, mode: int, pol: Polarization | str) -> PhotonicState:
    pol = Polarization.parse(pol)
    out = {}
    for key, amp in state.amplitudes.items():
        n = key.count(mode, pol)
        d = key.as_dict()
        d[(mode, pol)] = n + 1
        out[OccupationVector.of(d)] = amp * math.sqrt(n + 1)
    return PhotonicState(out)


def tensor(a: PhotonicState, b: PhotonicState) -> PhotonicState:
    overlap = a.modes & b.modes
    if overlap:
        raise ModeCollisionError(f"tensor factors share modes {sorted(overlap)}")
    out = {}
    for ka, xa in a.amplitudes.items():
        for kb, xb in b.amplitudes.items():
            out[OccupationVector(ka.slots + kb.slots)] = xa * xb
    return PhotonicState(out, normalized=a.normalized and b.normalized)


def encode_qubits(q: QubitState) -> PhotonicState:
    """Photon-encode a qubit state: one photon per mode, 0 as H and 1 as V."""
    out = {}
    for idx, amp in enumerate(q.amps):
        if abs(amp) < PRUNE:
            continue
        bits = format(idx, f"0{q.n}b") if q.n else ""
        out[OccupationVector(tuple((m, V if b == "1" else H, 1)
                                   for m, b in zip(q.mode_order, bits)))] = amp
    return PhotonicState(out, normalized=True)


# -- linear optics ------------------------------------------------------------

# A substitution maps each input slot to a list of (output slot, coefficient):
# a_in^dagger -> sum_k c_k a_out_k^dagger.
Substitution = Mapping[Slot, Sequence[tuple[Slot, complex]]]


@lru_cache(maxsize=4096)
def _expand_local(counts: tuple[int, ...], rows: tuple[tuple[tuple[Slot, complex], ...], ...]):
    """Expand prod_i (sum_k c_ik a_k^dagger)^{n_i} / sqrt(n_i!) acting on vacuum.

    Returns a dict from output-slot occupation tuple to Fock amplitude.
    """
    poly: dict[tuple[tuple[Slot, int], ...], complex] = {(): 1.0 + 0j}
    norm = 1.0
    for n, row in zip(counts, rows):
        norm *= math.factorial(n)
        for _ in range(n):
            nxt: dict[tuple[tuple[Slot, int], ...], complex] = {}
            for mono, c in poly.items():
                d = dict(mono)
                for slot, coef in row:
                    d2 = dict(d)
                    d2[slot] = d2.get(slot, 0) + 1
                    k = tuple(sorted(d2.items()))
                    nxt[k] = nxt.get(k, 0j) + c * coef
            poly = nxt
    scale = 1.0 / math.sqrt(norm)
    out = {}
    for mono, c in poly.items():
        f = math.prod(math.factorial(k) for _, k in mono)
        amp = c * scale * math.sqrt(f)
        if abs(amp) >= PRUNE:
            out[mono] = amp
    return out


def _substitute(state: PhotonicState, sub: Substitution, in_modes: Iterable[int],
                out_modes: Iterable[int]) -> PhotonicState:
    in_modes = set(in_modes)
    bystanders = state.modes - in_modes
    clash = bystanders & set(out_modes)
    if clash:
        raise ModeCollisionError(f"output modes {sorted(clash)} are occupied by other modes")
    in_slots = tuple(sorted(sub))
    rows = tuple(tuple((s, complex(c)) for s, c in sub[slot]) for slot in in_slots)
    out: dict[OccupationVector, complex] = {}
    for key, amp in state.amplitudes.items():
        d = key.as_dict()
        counts = tuple(d.pop(slot, 0) for slot in in_slots)
        rest = tuple((m, p, n) for (m, p), n in d.items())
        for mono, c in _expand_local(counts, rows).items():
            k = OccupationVector(rest + tuple((m, p, n) for (m, p), n in mono))
            out[k] = out.get(k, 0j) + amp * c
        if len(out) > MAX_TERMS:
            raise ResourceLimitError(f"state exceeded {MAX_TERMS} terms")
    return PhotonicState(out, normalized=state.normalized)


def _per_pol(mapping: Mapping[int, Sequence[tuple[int, float]]]) -> dict:
    """Polarization-independent mode substitution."""
    return {(m, p): [((o, p), c) for o, c in row] for m, row in mapping.items() for p in Polarization}


def apply_beamsplitter(state: PhotonicState, in_a: int, in_b: int, out_c: int, out_d: int) -> PhotonicState:
    """50:50 beamsplitter with a -> (c - d)/sqrt2 and b -> (c + d)/sqrt2 for both polarizations."""
    if in_a == in_b or out_c == out_d:
        raise ValueError("beamsplitter ports must be distinct")
    r = 1 / math.sqrt(2)
    sub = _per_pol({in_a: [(out_c, r), (out_d, -r)], in_b: [(out_c, r), (out_d, r)]})
    return _substitute(state, sub, (in_a, in_b), (out_c, out_d))


def apply_bs_split(state: PhotonicState, in_m: int, out_c: int, out_d: int) -> PhotonicState:
    """50:50 beamsplitter with vacuum on the second port: m -> (c + d)/sqrt2."""
    if out_c == out_d:
        raise ValueError("split outputs must be distinct")
    r = 1 / math.sqrt(2)
    sub = _per_pol({in_m: [(out_c, r), (out_d, r)]})
    return _substitute(state, sub, (in_m,), (out_c, out_d))


def apply_half_wave_ps(state: PhotonicState, mode: int) -> PhotonicState:
    """pi phase between H and V: amplitude picks up (-1)^(number of V photons in mode)."""
    out = {k: a * (-1) ** k.count(mode, V) for k, a in state.amplitudes.items()}
    return PhotonicState(out, normalized=state.normalized)


def apply_pol_rotation(state: PhotonicState, mode: int, theta: float) -> PhotonicState:
    """H -> cos H + sin V, V -> -sin H + cos V in one spatial mode."""
    c, s = math.cos(theta), math.sin(theta)
    sub = {(mode, H): [((mode, H), c), ((mode, V), s)],
           (mode, V): [((mode, H), -s), ((mode, V), c)]}
    return _substitute(state, sub, (mode,), (mode,))


def apply_pol_flip(state: PhotonicState, mode: int) -> PhotonicState:
    """Bit flip H <-> V in one spatial mode (half-wave plate at 45 degrees, no sign)."""
    out = {}
    for key, amp in state.amplitudes.items():
        swapped = tuple((m, Polarization(1 - p) if m == mode else p, n) for m, p, n in key.slots)
        out[OccupationVector(swapped)] = amp
    return PhotonicState(out, normalized=state.normalized)


# -- measurement --------------------------------------------------------------

def _as_pattern(pattern) -> PostSelectPattern:
    return pattern if isinstance(pattern, PostSelectPattern) else PostSelectPattern(pattern or {})


def project(state: PhotonicState, pattern) -> PhotonicState:
    """Unnormalized component whose per-mode totals match ``pattern``."""
    pattern = _as_pattern(pattern)
    return PhotonicState({k: a for k, a in state.amplitudes.items() if pattern.matches(k)})


def post_select(state: PhotonicState, pattern) -> tuple[float, PhotonicState]:
    """Probability of the coincidence ``pattern`` and the renormalized survivor.

    When nothing survives the probability is 0 and the conditional state is
    empty; raising is left to the caller.
    """
    if not state.normalized:
        raise ValueError("post_select needs a normalized state")
    kept = project(state, pattern)
    prob = kept.norm_sq()
    if not len(kept):
        return 0.0, PhotonicState()
    return prob, kept.renormalized()


def project_clicks(state: PhotonicState, modes: Iterable[int]) -> PhotonicState:
    """Component in which every listed mode holds at least one photon (threshold detectors)."""
    modes = tuple(modes)
    return PhotonicState({k: a for k, a in state.amplitudes.items() if all(k.count(m) for m in modes)})


def inner_product(a: PhotonicState, b: PhotonicState) -> complex:
    """<a|b>, antilinear in ``a``."""
    keys = a.amplitudes if len(a) <= len(b) else b.amplitudes
    return complex(sum(a[k].conjugate() * b[k] for k in keys))


def fidelity(a: PhotonicState, b: PhotonicState) -> float:
    return float(abs(inner_product(a, b)) ** 2)


def extract_qubits(state: PhotonicState, mode_order: Sequence[int]) -> QubitState:
    """Read a one-photon-per-mode state as polarization qubits in ``mode_order``."""
    mode_order = list(mode_order)
    if len(set(mode_order)) != len(mode_order):
        raise ValueError("mode_order has duplicates")
    n = len(mode_order)
    listed = set(mode_order)
    amps = np.zeros(2 ** n, dtype=complex)
    for key, amp in state.amplitudes.items():
        if key.modes - listed:
            raise EncodingError(f"term {key} has photons outside {mode_order}")
        idx = 0
        for m in mode_order:
            nh, nv = key.count(m, H), key.count(m, V)
            if nh + nv != 1:
                raise EncodingError(f"term {key} has {nh + nv} photons in mode {m}")
            idx = (idx << 1) | nv
        amps[idx] += amp
    nrm = np.linalg.norm(amps)
    if nrm == 0:
        raise EncodingError("state is empty")
    return QubitState(amps / nrm, mode_order)


# -- serialization ------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x) + 0.0, ".17g")


def state_to_records(state: PhotonicState) -> list[dict]:
    records = []
    for key, amp in state.terms():
        modes: dict[str, dict[str, int]] = {}
        for m, p, n in key.slots:
            modes.setdefault(str(m), {"H": 0, "V": 0})[p.name] = n
        records.append({"occ": modes, "amp": [amp.real, amp.imag]})
    return records


def state_from_records(records: Sequence[Mapping]) -> PhotonicState:
    amps: dict[OccupationVector, complex] = {}
    for rec in records:
        slots = []
        for m, pols in rec["occ"].items():
            for p, n in pols.items():
                slots.append((int(m), Polarization.parse(p), int(n)))
        re, im = rec["amp"]
        key = OccupationVector(tuple(slots))
        amps[key] = amps.get(key, 0j) + complex(float(re), float(im))
    state = PhotonicState(amps)
    if state.terms() and abs(state.norm_sq() - 1) <= NORM_TOL:
        state.normalized = True
    return state


def dump_json(obj, indent: int | None = None) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _dump(obj, indent, 0)


def _dump(obj, indent, level) -> str:
    if obj is None or isinstance(obj, (bool, str, int)):
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return "null"
        return _fmt(obj)
    if isinstance(obj, np.integer):
        return str(int(obj))
    if isinstance(obj, Mapping):
        items = [f"{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return _wrap("{", "}", items, indent, level)
    if isinstance(obj, (list, tuple)):
        return _wrap("[", "]", [_dump(v, indent, level + 1) for v in obj], indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _wrap(open_, close, items, indent, level) -> str:
    if not items:
        return open_ + close
    if indent is None:
        return open_ + ", ".join(items) + close
    pad = " " * (indent * (level + 1))
    return open_ + "\n" + ",\n".join(pad + i for i in items) + "\n" + " " * (indent * level) + close


def state_to_json(state: PhotonicState, indent: int | None = None) -> str:
    """Canonical JSON: terms in basis order, amplitudes as ``[re, im]``."""
    return dump_json(state_to_records(state), indent)


def state_from_json(text: str) -> PhotonicState:
    return state_from_records(json.loads(text))


def random_state(rng: np.random.Generator, n_modes: int, max_photons: int, n_terms: int) -> PhotonicState:
    """Random normalized superposition used by property tests and benchmarks."""
    slots = list(itertools.product(range(n_modes), Polarization))
    amps: dict[OccupationVector, complex] = {}
    while len(amps) < n_terms:
        total = int(rng.integers(0, max_photons + 1))
        picks = rng.integers(0, len(slots), size=total)
        key = OccupationVector(tuple((slots[i][0], slots[i][1], 1) for i in picks))
        amps[key] = complex(rng.normal(), rng.normal())
    return PhotonicState(amps).renormalized()
