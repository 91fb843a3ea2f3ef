"""Spin-1/2 x breathing x rocking Hilbert space with truncated Fock ladders.

Basis index of ``|spin, n_b, n_r>`` is ``spin + 2 * (n_r + (n_cut_r + 1) * n_b)``,
i.e. row-major over ``(n_b, n_r, spin)`` with the spin fastest (down=0, up=1).
Operators are dense and act as ``kron(op_b, op_r, op_spin)``.

Energies are stored as angular frequencies (hbar = 1).
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

MODES = ("b", "r")
SPINS = {"down": 0, "up": 1, "+": None, "-": None}


@dataclass(frozen=True)
class SpaceLayout:
    n_cut_b: int = 20
    n_cut_r: int = 40

    def __post_init__(self):
        if self.n_cut_b < 0 or self.n_cut_r < 0:
            raise ValueError("Fock cutoffs must be non-negative")

    @property
    def dim_b(self) -> int:
        return self.n_cut_b + 1

    @property
    def dim_r(self) -> int:
        return self.n_cut_r + 1

    @property
    def total_dim(self) -> int:
        return 2 * self.dim_b * self.dim_r

    @property
    def shape(self) -> tuple:
        return (self.dim_b, self.dim_r, 2)

    def index(self, spin: int, n_b: int, n_r: int) -> int:
        if not (0 <= n_b <= self.n_cut_b and 0 <= n_r <= self.n_cut_r and spin in (0, 1)):
            raise IndexError(f"basis label ({spin}, {n_b}, {n_r}) outside {self}")
        return spin + 2 * (n_r + self.dim_r * n_b)

    def cutoff(self, mode: str) -> int:
        return {"b": self.n_cut_b, "r": self.n_cut_r}[mode]


@dataclass(frozen=True, eq=False)
class Ket:
    amplitudes: np.ndarray
    layout: SpaceLayout

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.layout.total_dim,):
            raise ValueError(f"expected {self.layout.total_dim} amplitudes, got shape {amp.shape}")
        object.__setattr__(self, "amplitudes", amp)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "Ket":
        return Ket(self.amplitudes / self.norm(), self.layout)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to ``(n_b, n_r, spin)``."""
        return self.amplitudes.reshape(self.layout.shape)

    def inner(self, other: "Ket") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def expect(self, op: "LinOp") -> float:
        return float(np.real(np.vdot(self.amplitudes, op.matrix @ self.amplitudes)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["index", "re", "im"])
            for i, a in enumerate(self.amplitudes):
                writer.writerow([i, f"{a.real:.17g}", f"{a.imag:.17g}"])

    @classmethod
    def from_csv(cls, path, layout: SpaceLayout) -> "Ket":
        amp = np.zeros(layout.total_dim, dtype=complex)
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                amp[int(row["index"])] = complex(float(row["re"]), float(row["im"]))
        return cls(amp, layout)


@dataclass(frozen=True, eq=False)
class LinOp:
    matrix: np.ndarray
    layout: SpaceLayout
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if not np.iscomplexobj(m):
            m = m.astype(float)
        n = self.layout.total_dim
        if m.shape != (n, n):
            raise ValueError(f"operator shape {m.shape} does not match dimension {n}")
        if self.hermitian and m.size and np.max(np.abs(m - m.conj().T)) >= 1e-12 * max(1.0, np.max(np.abs(m))):
            raise ValueError("operator flagged hermitian is not")
        object.__setattr__(self, "matrix", m)

    def dag(self) -> "LinOp":
        return LinOp(self.matrix.conj().T, self.layout, self.hermitian)

    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix) or not np.any(self.matrix.imag)

    def __add__(self, other: "LinOp") -> "LinOp":
        return LinOp(self.matrix + other.matrix, self.layout, self.hermitian and other.hermitian)

    def __sub__(self, other: "LinOp") -> "LinOp":
        return LinOp(self.matrix - other.matrix, self.layout, self.hermitian and other.hermitian)

    def __neg__(self) -> "LinOp":
        return LinOp(-self.matrix, self.layout, self.hermitian)

    def __mul__(self, scalar) -> "LinOp":
        return LinOp(scalar * self.matrix, self.layout, self.hermitian and np.isreal(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Ket):
            return Ket(self.matrix @ other.amplitudes, self.layout)
        return LinOp(self.matrix @ other.matrix, self.layout)

    def as_hermitian(self) -> "LinOp":
        """Re-flag as hermitian (validated)."""
        return LinOp(self.matrix, self.layout, True)


def commutator(a: LinOp, b: LinOp) -> LinOp:
    return LinOp(a.matrix @ b.matrix - b.matrix @ a.matrix, a.layout)


def _embed(layout: SpaceLayout, op_b=None, op_r=None, op_s=None) -> np.ndarray:
    op_b = np.eye(layout.dim_b) if op_b is None else op_b
    op_r = np.eye(layout.dim_r) if op_r is None else op_r
    op_s = np.eye(2) if op_s is None else op_s
    return np.kron(op_b, np.kron(op_r, op_s))


def _ladder(cut: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cut + 1, dtype=float)), 1)


def identity(layout: SpaceLayout) -> LinOp:
    return LinOp(np.eye(layout.total_dim), layout, True)


def annihilator(layout: SpaceLayout, mode: str) -> LinOp:
    if mode == "b":
        return LinOp(_embed(layout, op_b=_ladder(layout.n_cut_b)), layout)
    if mode == "r":
        return LinOp(_embed(layout, op_r=_ladder(layout.n_cut_r)), layout)
    raise ValueError(f"unknown mode {mode!r}")


def creator(layout: SpaceLayout, mode: str) -> LinOp:
    return annihilator(layout, mode).dag()


def number(layout: SpaceLayout, mode: str) -> LinOp:
    cut = layout.cutoff(mode)
    diag = np.diag(np.arange(cut + 1, dtype=float))
    m = _embed(layout, op_b=diag) if mode == "b" else _embed(layout, op_r=diag)
    return LinOp(m, layout, True)


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),  # down = index 0
    "+": np.array([[0, 0], [1, 0]], dtype=complex),  # |up><down|
    "-": np.array([[0, 1], [0, 0]], dtype=complex),
}


def pauli(layout: SpaceLayout, axis: str) -> LinOp:
    """Pauli operator on the spin, with ``sigma_z |up> = +|up>``."""
    if axis not in _PAULI:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    s = _PAULI[axis]
    if not s.imag.any():
        s = s.real
    return LinOp(_embed(layout, op_s=s), layout, axis in "xyz")


# --- state preparation -----------------------------------------------------

@dataclass(frozen=True)
class StateSpec:
    """Product of a spin state and a two-mode motional state.

    kind: ``fock`` (uses n_b, n_r), ``twin`` (|n, n>), ``binomial``
    ((a_b^+ + a_r^+)^n / sqrt(2^n n!) |0,0>) or ``noon`` ((|n,0> + |0,n>)/sqrt2).
    """

    spin: str = "+"
    kind: str = "fock"
    n_b: int = 0
    n_r: int = 0
    n: int = 0

    def __post_init__(self):
        if self.spin not in SPINS:
            raise ValueError(f"unknown spin state {self.spin!r}")
        if self.kind not in ("fock", "twin", "binomial", "noon"):
            raise ValueError(f"unknown motional state kind {self.kind!r}")
        if min(self.n_b, self.n_r, self.n) < 0:
            raise ValueError("phonon numbers must be non-negative")

    def motional_amplitudes(self) -> dict:
        """Map ``(n_b, n_r) -> amplitude``."""
        if self.kind == "fock":
            return {(self.n_b, self.n_r): 1.0}
        n = self.n
        if self.kind == "twin":
            return {(n, n): 1.0}
        if self.kind == "noon":
            if n == 0:
                return {(0, 0): 1.0}
            return {(n, 0): 1 / math.sqrt(2), (0, n): 1 / math.sqrt(2)}
        return {(k, n - k): math.sqrt(math.comb(n, k) / 2**n) for k in range(n + 1)}

    def with_n(self, n: int) -> "StateSpec":
        if self.kind == "fock":
            raise ValueError("fock states have no single phonon-number parameter")
        return StateSpec(self.spin, self.kind, self.n_b, self.n_r, int(n))

    def __str__(self):
        if self.kind == "fock":
            return f"{self.spin} fock({self.n_b},{self.n_r})"
        return f"{self.spin} {self.kind}({self.n})"


_SPEC_RE = re.compile(r"^\s*(up|down|\+|-)\s+(fock|twin|binomial|noon)\s*\(\s*([\d\s,]*)\)\s*$")


def parse_state(text: str) -> StateSpec:
    """Parse strings such as ``"+ fock(2,0)"``, ``"down binomial(2)"``, ``"+ twin(5)"``."""
    m = _SPEC_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse state spec {text!r}")
    spin, kind, args = m.groups()
    nums = [int(a) for a in args.replace(" ", "").split(",") if a]
    if kind == "fock":
        if len(nums) != 2:
            raise ValueError("fock(...) takes two phonon numbers")
        return StateSpec(spin, kind, n_b=nums[0], n_r=nums[1])
    if len(nums) != 1:
        raise ValueError(f"{kind}(...) takes one phonon number")
    return StateSpec(spin, kind, n=nums[0])


def _spin_vector(spin: str) -> np.ndarray:
    if spin == "down":
        return np.array([1.0, 0.0])
    if spin == "up":
        return np.array([0.0, 1.0])
    sign = 1.0 if spin == "+" else -1.0
    return np.array([sign, 1.0]) / math.sqrt(2)  # (|up> +- |down>)/sqrt2


def prepare_state(layout: SpaceLayout, spec: StateSpec | str, margin: int = 0) -> Ket:
    if isinstance(spec, str):
        spec = parse_state(spec)
    psi = np.zeros(layout.shape, dtype=complex)
    spin = _spin_vector(spec.spin)
    for (nb, nr), amp in spec.motional_amplitudes().items():
        if nb > layout.n_cut_b - margin or nr > layout.n_cut_r - margin:
            raise ValueError(f"state {spec} exceeds cutoffs ({layout.n_cut_b}, {layout.n_cut_r}) - margin {margin}")
        psi[nb, nr, :] += amp * spin
    ket = Ket(psi.reshape(-1), layout)
    return ket.normalized()


def fock_probs(psi: Ket, mode: str) -> np.ndarray:
    p = np.abs(psi.tensor()) ** 2
    if mode == "b":
        return p.sum(axis=(1, 2))
    if mode == "r":
        return p.sum(axis=(0, 2))
    raise ValueError(f"unknown mode {mode!r}")


def spin_probs(psi: Ket) -> tuple:
    p = (np.abs(psi.tensor()) ** 2).sum(axis=(0, 1))
    return float(p[0]), float(p[1])


def tail_mass(psi: Ket, mode: str, rows: int = 2) -> float:
    """Population in the last ``rows`` Fock levels of a mode (never counting n=0)."""
    p = fock_probs(psi, mode)
    start = max(len(p) - rows, 1)
    return float(p[start:].sum())


def basis_labels(layout: SpaceLayout) -> Iterable[tuple]:
    for nb in range(layout.dim_b):
        for nr in range(layout.dim_r):
            for s in (0, 1):
                yield s, nb, nr
