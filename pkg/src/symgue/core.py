"""Signed-site conventions and the value types shared by every module.

Sites are labelled ``x = -n, ..., -1, 1, ..., n`` (there is no site 0) and a
matrix of half-size ``n`` has side ``2n``.  Array storage uses the order
``-n, ..., -1, 1, ..., n`` so that the mirror ``x -> -x`` is the index flip
``p -> 2n - 1 - p``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class SymgueError(Exception):
    """Base class for all errors raised by this package."""


class IndexDomainError(SymgueError, IndexError):
    pass


class InvalidSpecError(SymgueError, ValueError):
    pass


class DomainError(SymgueError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(SymgueError, ValueError):
    pass


class SolverFailure(SymgueError, RuntimeError):
    pass


class NumericalError(SymgueError, ArithmeticError):
    pass


class BranchAmbiguityError(NumericalError):
    pass


class SampleSizeError(SymgueError, ValueError):
    pass


class SymmetryClass(enum.Enum):
    """Extra index symmetry imposed on top of Hermiticity.

    ===========  ==========================
    tag          constraint
    ===========  ==========================
    PLAIN        none (plain GUE)
    FLIP1        ``W[x, y] == W[-y, -x]``
    CENTRAL2     ``W[x, y] == W[-x, -y]``
    ROWMIRROR3   ``W[x, y] == W[-x, y]``
    QUARTER4     ``W[x, y] == W[y, -x]``
    ===========  ==========================
    """

    PLAIN = "Plain"
    FLIP1 = "Flip1"
    CENTRAL2 = "Central2"
    ROWMIRROR3 = "RowMirror3"
    QUARTER4 = "Quarter4"

    @classmethod
    def parse(cls, value) -> "SymmetryClass":
        """Accept an enum member, its tag, its name, or the digits 0-4."""
        if isinstance(value, cls):
            return value
        key = str(value).strip()
        for member in cls:
            if key.lower() in (member.value.lower(), member.name.lower()):
                return member
        digits = {"0": cls.PLAIN, "1": cls.FLIP1, "2": cls.CENTRAL2,
                  "3": cls.ROWMIRROR3, "4": cls.QUARTER4}
        if key in digits:
            return digits[key]
        raise InvalidSpecError(f"invalid-class: unknown symmetry class {value!r}")

    def __str__(self):
        return self.value


ALL_CLASSES = tuple(SymmetryClass)


def pos(x: int, n: int) -> int:
    """Array index of signed site `x` for half-size `n`."""
    if x == 0 or abs(x) > n:
        raise IndexDomainError(f"site {x} is not in {{-{n}..-1, 1..{n}}}")
    return x + n if x < 0 else x + n - 1


def site(p: int, n: int) -> int:
    """Signed site stored at array index `p`; inverse of :func:`pos`."""
    if not 0 <= p < 2 * n:
        raise IndexDomainError(f"index {p} is not in [0, {2 * n})")
    return p - n if p < n else p - n + 1


def sites(n: int) -> np.ndarray:
    """All signed sites in storage order."""
    return np.concatenate([np.arange(-n, 0), np.arange(1, n + 1)])


def mirror_index(n: int) -> np.ndarray:
    """Index permutation realising ``x -> -x``."""
    return np.arange(2 * n - 1, -1, -1)


@dataclass(frozen=True)
class EnsembleSpec:
    """What to sample: symmetry class, half-size and the seed policy.

    The entry variance ``E|W_xy|^2 = 1/(2n)`` is derived from `n`.
    """

    symmetry: SymmetryClass
    n: int
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "symmetry", SymmetryClass.parse(self.symmetry))
        object.__setattr__(self, "master_seed", int(self.master_seed) & 0xFFFFFFFFFFFFFFFF)

    @property
    def side(self) -> int:
        return 2 * self.n

    @property
    def entry_variance(self) -> float:
        return 1.0 / (2 * self.n)


def validate_spec(spec: EnsembleSpec) -> None:
    """Raise :class:`InvalidSpecError` unless `spec` describes a samplable ensemble."""
    if not isinstance(spec.symmetry, SymmetryClass):
        raise InvalidSpecError(f"invalid-class: {spec.symmetry!r}")
    if isinstance(spec.n, bool) or not isinstance(spec.n, (int, np.integer)) or spec.n < 1:
        raise InvalidSpecError(f"invalid-size: n must be a positive integer, got {spec.n!r}")


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Dense ``2n x 2n`` Hermitian matrix with signed-site access."""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=np.complex128)
        if a.shape != (2 * self.n, 2 * self.n):
            raise PreconditionError(f"expected shape {(2 * self.n,) * 2}, got {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def from_array(cls, a) -> "HermitianMatrix":
        a = np.asarray(a, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
            raise PreconditionError(f"need a square matrix of even side, got {a.shape}")
        if np.max(np.abs(a - a.conj().T), initial=0.0) > 0.0:
            raise PreconditionError("matrix is not Hermitian")
        return cls(a.shape[0] // 2, a)

    @property
    def side(self) -> int:
        return 2 * self.n

    def __getitem__(self, xy):
        x, y = xy
        return self.entries[pos(x, self.n), pos(y, self.n)]

    def hermiticity_defect(self) -> float:
        a = self.entries
        return float(np.max(np.abs(a - a.conj().T)))

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.entries))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues, optionally with eigenvectors as columns of `basis`."""

    eigenvalues: np.ndarray
    basis: np.ndarray | None = field(default=None)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=np.float64)
        if ev.ndim != 1 or ev.size % 2:
            raise PreconditionError("a spectrum holds an even number 2n of eigenvalues")
        if ev.size > 1 and np.any(np.diff(ev) < 0):
            raise PreconditionError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def n(self) -> int:
        return self.eigenvalues.size // 2
