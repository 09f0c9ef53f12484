"""The W-expansion gate, its GHZ variant, seed states and cascades.

Gate wiring (mode roles named after the single-gate layout)::

    input ──┐
            BS1 ──> internal ──BS2──> out5, out6
    anc  ──┘   └──> out4 ──PS

with BS1 taking ``input -> (internal - out4)/sqrt2`` and
``anc -> (internal + out4)/sqrt2``, BS2 an all-plus vacuum-port split, and
PS the half-wave plate flipping the sign of V on ``out4``. Success is one
photon in each of ``out4``, ``out5``, ``out6``.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .fock import (
    EncodingError,
    H,
    PhotonicState,
    QubitState,
    V,
    apply_beamsplitter,
    apply_bs_split,
    apply_half_wave_ps,
    apply_pol_flip,
    encode_qubits,
    extract_qubits,
    make_fock,
    occ,
    post_select,
    tensor,
)

W_CHECK_TOL = 1e-9


class NonWInputWarning(UserWarning):
    """The state handed to :func:`expand_w` is not a W state."""


@dataclass
class GateResult:
    success_prob: float
    conditional: PhotonicState
    output_modes: list[int]

    def qubits(self, mode_order: Sequence[int] | None = None) -> QubitState:
        order = sorted(self.conditional.modes) if mode_order is None else mode_order
        return extract_qubits(self.conditional, order)


@dataclass
class CascadePlan:
    """``seed`` is ``"single_V"`` or ``"epr_pair"``; ``feed_rule`` is
    ``"lowest_new_mode"`` or an explicit list of modes, one per stage."""

    seed: str = "single_V"
    k: int = 1
    feed_rule: str | list[int] = "lowest_new_mode"

    def __post_init__(self):
        if self.seed not in ("single_V", "epr_pair"):
            raise ValueError(f"unknown seed {self.seed!r}")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if not isinstance(self.feed_rule, str) and len(self.feed_rule) != self.k:
            raise ValueError("explicit feed list needs one mode per stage")


@dataclass
class CascadeResult:
    state: PhotonicState
    p_success: float
    stage_probs: list[float] = field(default_factory=list)
    modes: list[int] = field(default_factory=list)

    def __iter__(self):
        # unpacks as (state, p_success)
        return iter((self.state, self.p_success))


def fresh_modes(state: PhotonicState, count: int = 5) -> list[int]:
    start = max(state.modes, default=-1) + 1
    return list(range(start, start + count))


def gate_optics(state: PhotonicState, input_mode: int, anc: int, internal: int,
                out4: int, out5: int, out6: int, phase_shift: bool = True) -> PhotonicState:
    """The passive part of the gate: BS1, BS2 and optionally PS. No ancilla, no detection."""
    state = apply_beamsplitter(state, input_mode, anc, internal, out4)
    state = apply_bs_split(state, internal, out5, out6)
    if phase_shift:
        state = apply_half_wave_ps(state, out4)
    return state


def _check_single_photon(state: PhotonicState, mode: int):
    bad = [k for k in state.amplitudes if k.count(mode) != 1]
    if bad:
        raise EncodingError(f"input mode {mode} must hold exactly one photon in every term")


def _run(state, input_mode, fresh, ancilla, phase_shift) -> tuple[float, PhotonicState, list[int]]:
    if not state.normalized:
        raise ValueError("gate input must be normalized")
    _check_single_photon(state, input_mode)
    anc, internal, out4, out5, out6 = fresh if fresh is not None else fresh_modes(state)
    full = tensor(state, ancilla(anc))
    full = gate_optics(full, input_mode, anc, internal, out4, out5, out6, phase_shift)
    prob, cond = post_select(full, {out4: 1, out5: 1, out6: 1})
    return prob, cond, [out4, out5, out6]


def two_h(mode: int) -> PhotonicState:
    """Two H photons in one mode, |2_H>."""
    return make_fock(occ((mode, H, 2)))


def hv_pair(mode: int) -> PhotonicState:
    """One H and one V photon in one mode, |1_H 1_V>."""
    return make_fock(occ((mode, H, 1), (mode, V, 1)))


def t_w_plus2(state: PhotonicState, input_mode: int, fresh: Sequence[int] | None = None) -> GateResult:
    """Apply the W-expansion gate to the photon in ``input_mode``.

    ``fresh`` gives the ancilla, internal and three output modes; by default
    the five ids after the highest mode in use. The result's conditional
    state lives on the untouched modes plus the three outputs.
    """
    prob, cond, outs = _run(state, input_mode, fresh, two_h, phase_shift=True)
    return GateResult(prob, cond, outs)


def ghz_plus2(state: PhotonicState, input_mode: int, fresh: Sequence[int] | None = None,
              correct: bool = True) -> GateResult:
    """GHZ-extension variant: ancilla |1_H 1_V>, no phase shifter.

    Uncorrected, the post-selected branches come out as
    ``|1_H>_in -> 2^{-3/2} |1_V>_4 |1_H>_5 |1_H>_6`` and
    ``|1_V>_in -> 2^{-3/2} |1_H>_4 |1_V>_5 |1_V>_6``, both with sign +1.
    The odd photon sits in ``out4`` because two-photon interference at BS1
    sends the matched pair into the internal arm. With ``correct=True``
    a bit flip on ``out4`` turns GHZ_N into GHZ_{N+2}.
    """
    prob, cond, outs = _run(state, input_mode, fresh, hv_pair, phase_shift=False)
    if correct and prob > 0:
        cond = apply_pol_flip(cond, outs[0])
    return GateResult(prob, cond, outs)


def epr_pair(mode_a: int, mode_b: int) -> PhotonicState:
    """(|1_H>_a |1_V>_b + |1_V>_a |1_H>_b)/sqrt2."""
    if mode_a == mode_b:
        raise ValueError("EPR modes must differ")
    r = 1 / math.sqrt(2)
    return PhotonicState({occ((mode_a, H, 1), (mode_b, V, 1)): r,
                          occ((mode_a, V, 1), (mode_b, H, 1)): r}, normalized=True)


def w_target(n: int, mode_order: Sequence[int] | None = None) -> QubitState:
    if n < 1:
        raise ValueError("W states need n >= 1")
    amps = np.zeros(2 ** n, dtype=complex)
    amps[[1 << i for i in range(n)]] = 1 / math.sqrt(n)
    return QubitState(amps, list(range(n)) if mode_order is None else mode_order)


def ghz_target(n: int, mode_order: Sequence[int] | None = None) -> QubitState:
    if n < 2:
        raise ValueError("GHZ states need n >= 2")
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return QubitState(amps, list(range(n)) if mode_order is None else mode_order)


def w_fidelity(state: PhotonicState) -> float:
    modes = sorted(state.modes)
    return extract_qubits(state, modes).fidelity(w_target(len(modes), modes))


def ghz_fidelity(state: PhotonicState) -> float:
    modes = sorted(state.modes)
    return extract_qubits(state, modes).fidelity(ghz_target(len(modes), modes))


def expand_w(state: PhotonicState, input_mode: int, fresh: Sequence[int] | None = None) -> GateResult:
    """Grow a W state by two photons; expected success (N+2)/(16N).

    A non-W input only triggers :class:`NonWInputWarning`; the gate runs anyway.
    """
    try:
        ok = w_fidelity(state) >= 1 - W_CHECK_TOL
    except EncodingError:
        ok = False
    if not ok:
        warnings.warn("input is not a W state", NonWInputWarning, stacklevel=2)
    return t_w_plus2(state, input_mode, fresh)


def single_v(mode: int = 1) -> PhotonicState:
    return make_fock(occ((mode, V, 1)))


def cascade(plan: CascadePlan) -> CascadeResult:
    """Seed, then apply the W gate ``plan.k`` times, feeding one fresh output each stage."""
    if plan.seed == "single_V":
        state, feed = single_v(1), 1
    else:
        state, feed = epr_pair(0, 1), 1
    probs: list[float] = []
    for stage in range(plan.k):
        if not isinstance(plan.feed_rule, str):
            feed = plan.feed_rule[stage]
            if feed not in state.modes:
                raise ValueError(f"feed mode {feed} is not occupied at stage {stage}")
        res = t_w_plus2(state, feed)
        probs.append(res.success_prob)
        state = res.conditional
        if res.success_prob == 0:
            break
        feed = min(res.output_modes)
    return CascadeResult(state, math.prod(probs), probs, sorted(state.modes))


def prepare_w(n: int) -> CascadeResult:
    """Engine-built |W_n>: a seed (single V for odd n, EPR for even n) plus cascaded gates."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n % 2:
        return cascade(CascadePlan("single_V", (n - 1) // 2))
    return cascade(CascadePlan("epr_pair", (n - 2) // 2))


def prepare_ghz(n: int) -> CascadeResult:
    """Engine-built |GHZ_n> from a (|H>+|V>)/sqrt2 photon (odd n) or a GHZ_2 pair (even n)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if n % 2:
        state = encode_qubits(QubitState(np.array([1, 1]) / math.sqrt(2), [1]))
    else:
        state = encode_qubits(ghz_target(2))
    probs = []
    while len(state.modes) < n:
        res = ghz_plus2(state, max(state.modes))
        probs.append(res.success_prob)
        state = res.conditional
    return CascadeResult(state, math.prod(probs), probs, sorted(state.modes))
