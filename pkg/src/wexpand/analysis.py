"""Closed-form success probabilities and qubit-level entanglement structure."""

from __future__ import annotations

import itertools
import string
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fock import QubitState, dump_json

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-9
PSD_TOL = 1e-9

_SIGMA_YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


@dataclass
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        dim = self.entries.shape[0]
        if self.entries.shape != (dim, dim) or dim & (dim - 1) or dim == 0:
            raise ValueError(f"bad density-matrix shape {self.entries.shape}")

    @property
    def n(self) -> int:
        return self.entries.shape[0].bit_length() - 1

    @classmethod
    def pure(cls, q: QubitState) -> DensityMatrix:
        return cls(np.outer(q.amps, q.amps.conj()))

    def validate(self) -> None:
        m = self.entries
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1) > TRACE_TOL:
            raise ValueError("density matrix trace is not 1")
        if np.linalg.eigvalsh(m).min() < -PSD_TOL:
            raise ValueError("density matrix is not positive semidefinite")


def success_formula(kind: str, n_or_k: int | None = None) -> float:
    """Exact success probability of the named construction.

    ``expand_w`` takes N (the input W size), ``cascade_odd`` and
    ``cascade_even`` take the number of gates k, ``ghz_plus2`` ignores its argument.
    """
    if kind == "ghz_plus2":
        return float(Fraction(1, 8))
    if n_or_k is None:
        raise ValueError(f"{kind} needs an argument")
    if kind == "expand_w":
        if n_or_k < 1:
            raise ValueError("N must be >= 1")
        return float(Fraction(n_or_k + 2, 16 * n_or_k))
    if kind in ("cascade_odd", "cascade_even"):
        if n_or_k < 0:
            raise ValueError("k must be >= 0")
        num = 2 * n_or_k + 1 if kind == "cascade_odd" else n_or_k + 1
        return float(Fraction(num, 16 ** n_or_k))
    raise ValueError(f"unknown formula {kind!r}")


def reduce(q: QubitState | DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Partial trace onto the qubits in ``keep``, in the order listed."""
    rho = DensityMatrix.pure(q) if isinstance(q, QubitState) else q
    n = rho.n
    keep = list(keep)
    if len(set(keep)) != len(keep) or any(not 0 <= i < n for i in keep):
        raise IndexError(f"invalid qubit indices {keep} for {n} qubits")
    letters = string.ascii_letters
    if 2 * n > len(letters):
        raise ValueError("too many qubits")
    rows = list(letters[:n])
    cols = [rows[i] if i not in keep else letters[n + i] for i in range(n)]
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    t = rho.entries.reshape([2] * (2 * n))
    r = np.einsum(f"{''.join(rows)}{''.join(cols)}->{out}", t)
    d = 2 ** len(keep)
    return DensityMatrix(r.reshape(d, d))


def concurrence(rho: DensityMatrix) -> float:
    """Two-qubit concurrence from the eigenvalues of rho (sy x sy) rho* (sy x sy)."""
    if rho.entries.shape != (4, 4):
        raise ValueError("concurrence needs a two-qubit density matrix")
    m = rho.entries
    r = m @ _SIGMA_YY @ m.conj() @ _SIGMA_YY
    lam = np.sort(np.sqrt(np.abs(np.linalg.eigvals(r))))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def web_report(q: QubitState) -> dict[tuple[int, int], float]:
    """Concurrence of every qubit pair after tracing out the rest."""
    if q.n > 8:
        raise ValueError("web_report supports at most 8 qubits")
    rho = DensityMatrix.pure(q)
    return {(i, j): concurrence(reduce(rho, [i, j])) for i, j in itertools.combinations(range(q.n), 2)}


def web_report_json(report: dict[tuple[int, int], float]) -> str:
    return dump_json({"pairs": [{"i": i, "j": j, "concurrence": c} for (i, j), c in report.items()]})
