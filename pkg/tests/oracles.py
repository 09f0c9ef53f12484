"""Independent reference computations used only by the tests.

Linear-optics amplitudes come from matrix permanents of the single-photon
transfer matrix (brute force over permutations), not from the engine's
creation-operator expansion. Reduced density matrices are built by explicit
loops over basis strings, and concurrence uses the Hermitian
sqrt(rho) rho~ sqrt(rho) form rather than the engine's non-Hermitian product.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def permanent(m: np.ndarray) -> complex:
    n = m.shape[0]
    if n == 0:
        return 1.0
    return sum(math.prod(m[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def transfer_amplitudes(transfer: dict, in_counts: dict) -> dict:
    """Output amplitudes of a linear-optical network on one Fock input.

    ``transfer[in_slot]`` maps output slots to coefficients, so a photon in
    ``in_slot`` leaves as sum_k c_k a_k^dagger. Returns ``{out_counts: amp}``
    with ``out_counts`` a sorted tuple of ``(slot, n)``.
    """
    in_slots = [s for s, n in sorted(in_counts.items()) for _ in range(n)]
    out_slots = sorted({o for row in transfer.values() for o in row})
    total = len(in_slots)
    denom_in = math.prod(math.factorial(n) for n in in_counts.values())
    out = {}
    for comp in _compositions(total, len(out_slots)):
        rows = [s for s, n in zip(out_slots, comp) for _ in range(n)]
        m = np.array([[transfer[i].get(o, 0) for i in in_slots] for o in rows], dtype=complex).reshape(total, total)
        amp = permanent(m) / math.sqrt(denom_in * math.prod(math.factorial(n) for n in comp))
        if abs(amp) > 1e-14:
            out[tuple((s, n) for s, n in zip(out_slots, comp) if n)] = amp
    return out


def reduced_by_loops(amps: np.ndarray, n: int, keep: list[int]) -> np.ndarray:
    """rho_keep[a, b] = sum over traced bits r of psi[a, r] psi*[b, r]."""
    k = len(keep)
    rest = [i for i in range(n) if i not in keep]
    rho = np.zeros((2 ** k, 2 ** k), dtype=complex)

    def index(kept_bits, rest_bits):
        bits = [0] * n
        for pos, b in zip(keep, kept_bits):
            bits[pos] = b
        for pos, b in zip(rest, rest_bits):
            bits[pos] = b
        return int("".join(map(str, bits)), 2) if n else 0

    for a in itertools.product((0, 1), repeat=k):
        for b in itertools.product((0, 1), repeat=k):
            s = 0j
            for r in itertools.product((0, 1), repeat=n - k):
                s += amps[index(a, r)] * np.conj(amps[index(b, r)])
            rho[int("".join(map(str, a)), 2), int("".join(map(str, b)), 2)] = s
    return rho


def concurrence_hermitian(rho: np.ndarray) -> float:
    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)
    tilde = yy @ rho.conj() @ yy
    w, vecs = np.linalg.eigh(rho)
    s = vecs @ np.diag(np.sqrt(np.clip(w, 0, None))) @ vecs.conj().T
    lam = np.sort(np.sqrt(np.clip(np.linalg.eigvalsh((s @ tilde @ s + (s @ tilde @ s).conj().T) / 2), 0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1:].sum()))
