"""N-qubit Pauli strings in the i^phase * X^x * Z^z convention.

A Pauli operator is stored as two bitmasks (x, z) plus an integer power of
i: P = i^phase * prod_j X_j^{x_j} * prod_j Z_j^{z_j}, with all X factors to
the left of all Z factors.  In this convention Y = i*X*Z, and a Hermitian
Pauli has phase == popcount(x & z) (mod 2).  Bit j of a mask refers to
qubit j.
"""

from __future__ import annotations

from dataclasses import dataclass

_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


@dataclass(frozen=True)
class PauliString:
    n: int
    x_bits: int
    z_bits: int
    phase_power: int = 0  # exponent of i, mod 4

    def __post_init__(self):
        if self.x_bits >> self.n or self.z_bits >> self.n:
            raise ValueError("support bits exceed qubit count")
        object.__setattr__(self, "phase_power", self.phase_power % 4)

    @classmethod
    def from_label(cls, label: str, sign: complex = 1) -> "PauliString":
        """Build from a string like 'XIZY' (qubit 0 is the first letter)."""
        x = z = 0
        extra = 0
        for j, c in enumerate(label.upper()):
            xb, zb = _LETTER_TO_BITS[c]
            x |= xb << j
            z |= zb << j
            if xb and zb:  # Y contributes a factor i
                extra += 1
        phase = {1: 0, 1j: 1, -1: 2, -1j: 3}[sign]
        return cls(len(label), x, z, (phase + extra) % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @property
    def phase(self) -> complex:
        return (1, 1j, -1, -1j)[self.phase_power]

    @property
    def weight(self) -> int:
        return ((self.x_bits | self.z_bits)).bit_count()

    def is_hermitian(self) -> bool:
        return (self.phase_power - (self.x_bits & self.z_bits).bit_count()) % 2 == 0

    def commutes_with(self, other: "PauliString") -> bool:
        s = (self.x_bits & other.z_bits).bit_count()
        s += (self.z_bits & other.x_bits).bit_count()
        return s % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        # Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1
        swap = (self.z_bits & other.x_bits).bit_count()
        return PauliString(
            self.n,
            self.x_bits ^ other.x_bits,
            self.z_bits ^ other.z_bits,
            (self.phase_power + other.phase_power + 2 * swap) % 4,
        )

    def adjoint(self) -> "PauliString":
        y = (self.x_bits & self.z_bits).bit_count()
        return PauliString(self.n, self.x_bits, self.z_bits,
                           (-self.phase_power + 2 * y) % 4)

    def label(self) -> str:
        s = []
        for j in range(self.n):
            s.append(_BITS_TO_LETTER[((self.x_bits >> j) & 1, (self.z_bits >> j) & 1)])
        return "".join(s)

    def __repr__(self):
        pre = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase_power2()]
        return f"{pre}{self.label()}"

    def phase_power2(self) -> int:
        """Phase relative to the Hermitian representative i^{x.z}."""
        return (self.phase_power - (self.x_bits & self.z_bits).bit_count()) % 4
