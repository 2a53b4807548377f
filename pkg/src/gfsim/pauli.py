"""Phased Pauli-string algebra and the Jordan-Wigner fermion-to-qubit map.

Letters are encoded per qubit as integers 0..3 = I, X, Y, Z.  Qubit 0 is the
least significant bit of a computational-basis index, so the dense matrix of
an n-qubit string is kron(P_{n-1}, ..., P_1, P_0).

Spin orbitals are interleaved onto qubits as m = 2p + s with s = 0 for up
and s = 1 for down spin, so a doubly occupied lowest orbital occupies
qubits 0 and 1.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

LETTERS = "IXYZ"

_PAULI_DENSE = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]

# Single-qubit products P_a P_b = i**_PHASE_EXP[a,b] * P_{_PROD_CODE[a,b]},
# tabulated over the 16 letter pairs.
_PROD_CODE = np.array(
    [[0, 1, 2, 3],
     [1, 0, 3, 2],
     [2, 3, 0, 1],
     [3, 2, 1, 0]], dtype=np.uint8)
_PHASE_EXP = np.array(
    [[0, 0, 0, 0],
     [0, 0, 1, 3],
     [0, 3, 0, 1],
     [0, 1, 3, 0]], dtype=np.int64)
_I_POWERS = np.array([1, 1j, -1, -1j])


class DimensionError(ValueError):
    """Raised when operands act on different qubit counts."""


class PauliTerm:
    """A complex coefficient times a tensor product of Pauli letters."""

    __slots__ = ("coeff", "letters", "_masks")

    def __init__(self, coeff: complex, letters):
        self.coeff = complex(coeff)
        arr = np.asarray(letters, dtype=np.uint8)
        arr.setflags(write=False)
        if arr.ndim != 1 or (arr.size and arr.max() > 3):
            raise ValueError("letters must be a 1-D sequence of codes 0..3")
        self.letters = arr
        self._masks = None

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliTerm":
        return cls(coeff, np.zeros(n_qubits, dtype=np.uint8))

    @classmethod
    def from_ops(cls, n_qubits: int, ops: Iterable[tuple[int, str]],
                 coeff: complex = 1.0) -> "PauliTerm":
        """Build from (qubit, letter) pairs, e.g. [(5, "Y"), (4, "X")]."""
        letters = np.zeros(n_qubits, dtype=np.uint8)
        for qubit, letter in ops:
            if not 0 <= qubit < n_qubits:
                raise IndexError(f"qubit {qubit} out of range for {n_qubits}")
            letters[qubit] = LETTERS.index(letter)
        return cls(coeff, letters)

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliTerm":
        """Build from a string over IXYZ; character k acts on qubit k."""
        return cls(coeff, [LETTERS.index(ch) for ch in label])

    @property
    def n_qubits(self) -> int:
        return self.letters.size

    @property
    def label(self) -> str:
        return "".join(LETTERS[c] for c in self.letters)

    def masks(self) -> tuple[int, int, int]:
        """(flip mask over X/Y, sign mask over Y/Z, Y count) as Python ints."""
        if self._masks is None:
            flip = sign = n_y = 0
            for j, code in enumerate(self.letters):
                if code in (1, 2):
                    flip |= 1 << j
                if code in (2, 3):
                    sign |= 1 << j
                if code == 2:
                    n_y += 1
            self._masks = (flip, sign, n_y)
        return self._masks

    def __mul__(self, other):
        if isinstance(other, PauliTerm):
            return multiply(self, other)
        return PauliTerm(self.coeff * other, self.letters)

    __rmul__ = __mul__

    def dagger(self) -> "PauliTerm":
        return PauliTerm(np.conj(self.coeff), self.letters)

    def padded(self, n_qubits: int) -> "PauliTerm":
        """Extend with identity letters on qubits above the current count."""
        if n_qubits < self.n_qubits:
            raise DimensionError("cannot shrink a Pauli term")
        letters = np.zeros(n_qubits, dtype=np.uint8)
        letters[: self.n_qubits] = self.letters
        return PauliTerm(self.coeff, letters)

    def to_dense(self) -> np.ndarray:
        mat = np.array([[self.coeff]], dtype=complex)
        for code in self.letters[::-1]:
            mat = np.kron(mat, _PAULI_DENSE[code])
        return mat

    def __repr__(self):
        return f"PauliTerm({self.coeff:+.6g}, {self.label})"


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Product of two Pauli terms via the 16-pair lookup tables."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(
            f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    codes = _PROD_CODE[a.letters, b.letters]
    phase = _I_POWERS[int(_PHASE_EXP[a.letters, b.letters].sum()) % 4]
    return PauliTerm(a.coeff * b.coeff * phase, codes)


class PauliSum:
    """Canonically merged linear combination of Pauli terms."""

    __slots__ = ("terms",)

    def __init__(self, terms: Sequence[PauliTerm] = (), prune: float = 1e-14):
        merged: dict[bytes, PauliTerm] = {}
        n = None
        for t in terms:
            if n is None:
                n = t.n_qubits
            elif t.n_qubits != n:
                raise DimensionError("mixed qubit counts in PauliSum")
            key = t.letters.tobytes()
            if key in merged:
                prev = merged[key]
                merged[key] = PauliTerm(prev.coeff + t.coeff, prev.letters)
            else:
                merged[key] = t
        self.terms = tuple(
            t for key, t in sorted(merged.items())
            if abs(t.coeff) > prune)

    @classmethod
    def zero(cls) -> "PauliSum":
        return cls(())

    @property
    def n_qubits(self) -> int:
        if not self.terms:
            raise ValueError("empty PauliSum has no qubit count")
        return self.terms[0].n_qubits

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.terms + other.terms)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            return PauliSum([multiply(a, b) for a in self.terms
                             for b in other.terms])
        if isinstance(other, PauliTerm):
            return PauliSum([multiply(a, other) for a in self.terms])
        return PauliSum([t * other for t in self.terms])

    def __rmul__(self, scalar):
        return self * scalar

    def dagger(self) -> "PauliSum":
        return PauliSum([t.dagger() for t in self.terms])

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(t.coeff.imag) <= tol for t in self.terms)

    def padded(self, n_qubits: int) -> "PauliSum":
        return PauliSum([t.padded(n_qubits) for t in self.terms])

    def to_dense(self, n_qubits: int | None = None) -> np.ndarray:
        n = n_qubits if n_qubits is not None else self.n_qubits
        dim = 2 ** n
        out = np.zeros((dim, dim), dtype=complex)
        for t in self.terms:
            out += t.padded(n).to_dense()
        return out

    def canonical_bytes(self) -> bytes:
        """Stable byte serialization, used for content hashing."""
        parts = []
        for t in self.terms:
            parts.append(t.letters.tobytes())
            parts.append(np.array([t.coeff.real, t.coeff.imag]).tobytes())
        return b"".join(parts)

    def __repr__(self):
        inner = " + ".join(f"({t.coeff:.4g})*{t.label}" for t in self.terms[:4])
        more = f" ... [{len(self.terms)} terms]" if len(self.terms) > 4 else ""
        return f"PauliSum({inner}{more})"


def jw_majorana_pair(m: int, n_qubits: int) -> tuple[PauliTerm, PauliTerm]:
    """The two unitary strings whose half sum/difference give a_m / a_m†.

    u0 = Z_0 ... Z_{m-1} X_m and u1 = i Z_0 ... Z_{m-1} Y_m, so that
    (u0 + u1)/2 equals the Jordan-Wigner matrix of a_m and (u0 - u1)/2
    equals that of a_m†.
    """
    if not 0 <= m < n_qubits:
        raise IndexError(f"mode {m} out of range for {n_qubits} qubits")
    letters = np.zeros(n_qubits, dtype=np.uint8)
    letters[:m] = 3
    l0 = letters.copy()
    l0[m] = 1
    l1 = letters.copy()
    l1[m] = 2
    return PauliTerm(1.0, l0), PauliTerm(1j, l1)


def jw_ladder(m: int, n_qubits: int, dagger: bool) -> PauliSum:
    """Jordan-Wigner image of a_m† (dagger=True) or a_m as a PauliSum."""
    u0, u1 = jw_majorana_pair(m, n_qubits)
    s = -0.5 if dagger else 0.5
    return PauliSum([u0 * 0.5, u1 * s])


def jw_transform(coeff: complex, ops: Sequence[tuple[int, bool]],
                 n_qubits: int) -> PauliSum:
    """Map a fermionic monomial coeff * prod_k op_k to qubit operators.

    ops lists (mode, is_creation) factors in operator order, leftmost first.
    """
    out = PauliSum([PauliTerm.identity(n_qubits, coeff)])
    for mode, is_creation in ops:
        out = out * jw_ladder(mode, n_qubits, is_creation)
    return out


def aux_ladder(m: int, m_prime: int, sign: int,
               n_qubits: int) -> tuple[PauliSum, PauliSum]:
    """Two-mode interference ladder pair used by the off-diagonal circuit.

    annihilation = (a_m + sign * exp(-i pi/4) a_{m'}) / 2; creation is its
    Hermitian conjugate.  Returns (creation, annihilation).
    """
    if m == m_prime:
        raise ValueError("mode indices must differ")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    phase = np.exp(-1j * np.pi / 4)
    annihilation = PauliSum(
        (0.5 * jw_ladder(m, n_qubits, False)
         + (0.5 * sign * phase) * jw_ladder(m_prime, n_qubits, False)).terms)
    return annihilation.dagger(), annihilation
