"""Constraint orbits and matrix sampling for the five symmetry classes.

Each entry position ``(x, y)`` is moved around by the Hermitian map
``(x, y) -> (y, x)`` (value conjugated) and by the class map (value copied).
Positions reachable from one another form an orbit that carries one
independent Gaussian.  An orbit whose closure maps a position onto itself
with an odd number of conjugations can only hold a real value.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np

from . import rng
from .core import (EnsembleSpec, HermitianMatrix, PreconditionError, SymmetryClass,
                   pos, sites, validate_spec)


class Reality(enum.Enum):
    COMPLEX_FREE = "ComplexFree"
    REAL_CONSTRAINED = "RealConstrained"


# Signed 2x2 permutation acting on the column (x, y), plus a conjugation bit.
_HERMITIAN = ((0, 1, 1, 0), True)
CLASS_MAPS = {
    SymmetryClass.PLAIN: None,
    SymmetryClass.FLIP1: ((0, -1, -1, 0), False),
    SymmetryClass.CENTRAL2: ((-1, 0, 0, -1), False),
    SymmetryClass.ROWMIRROR3: ((-1, 0, 0, 1), False),
    SymmetryClass.QUARTER4: ((0, 1, -1, 0), False),
}


def _compose(g, h):
    (a, b, c, d), cg = g
    (e, f, gg, hh), ch = h
    m = (a * e + b * gg, a * f + b * hh, c * e + d * gg, c * f + d * hh)
    return m, cg ^ ch


def symmetry_group(symmetry: SymmetryClass):
    """All position maps generated by Hermiticity and the class map."""
    gens = [_HERMITIAN]
    if CLASS_MAPS[symmetry] is not None:
        gens.append(CLASS_MAPS[symmetry])
    identity = ((1, 0, 0, 1), False)
    group = [identity]
    frontier = [identity]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                e = _compose(g, h)
                if e not in group:
                    group.append(e)
                    nxt.append(e)
        frontier = nxt
    return group


def _apply(elem, x, y):
    (a, b, c, d), _ = elem
    return a * x + b * y, c * x + d * y


@dataclass(frozen=True)
class Orbit:
    representative: tuple
    members: list
    reality: Reality


@dataclass(frozen=True, eq=False)
class OrbitSystem:
    """Partition of the ``(2n)^2`` entry positions into constraint orbits.

    Attributes
    ----------
    orbit_of : ndarray of int, shape (2n, 2n)
        Orbit id of each position, ids ordered by representative.
    parity : ndarray of bool, shape (2n, 2n)
        True where the stored value is the conjugate of the representative's.
        Always False on real-constrained orbits.
    representatives : ndarray of int
        Flat index ``pos(x) * 2n + pos(y)`` of each orbit's representative.
    real : ndarray of bool
        Reality flag per orbit.
    """

    n: int
    symmetry: SymmetryClass
    orbit_of: np.ndarray
    parity: np.ndarray
    representatives: np.ndarray
    real: np.ndarray

    @property
    def n_orbits(self) -> int:
        return self.representatives.size

    def reality(self, orbit_id: int) -> Reality:
        return Reality.REAL_CONSTRAINED if self.real[orbit_id] else Reality.COMPLEX_FREE

    def position_to_orbit(self, x: int, y: int):
        p, q = pos(x, self.n), pos(y, self.n)
        return int(self.orbit_of[p, q]), bool(self.parity[p, q])

    @functools.cached_property
    def orbits(self) -> list:
        """Explicit orbit list with signed positions; meant for small n."""
        side = 2 * self.n
        s = sites(self.n)
        flat_ids = self.orbit_of.ravel()
        order = np.argsort(flat_ids, kind="stable")
        bounds = np.searchsorted(flat_ids[order], np.arange(self.n_orbits + 1))
        out = []
        for k in range(self.n_orbits):
            idx = order[bounds[k]:bounds[k + 1]]
            members = [((int(s[i // side]), int(s[i % side])), bool(self.parity.flat[i]))
                       for i in idx]
            r = int(self.representatives[k])
            out.append(Orbit((int(s[r // side]), int(s[r % side])), members, self.reality(k)))
        return out


def free_parameter_count(system: OrbitSystem) -> int:
    """Real dimension of the space of admissible matrices."""
    return int(2 * system.n_orbits - np.count_nonzero(system.real))


@functools.lru_cache(maxsize=32)
def build_orbit_system(symmetry: SymmetryClass, n: int) -> OrbitSystem:
    """Close the position set under the symmetry group and record the orbits."""
    symmetry = SymmetryClass.parse(symmetry)
    validate_spec(EnsembleSpec(symmetry, n))
    side = 2 * n
    s = sites(n)
    X, Y = np.meshgrid(s, s, indexing="ij")
    # signed site -> array index, valid for s in [-n, n] \ {0}
    lookup = np.empty(2 * n + 1, dtype=np.int64)
    lookup[:n] = np.arange(n)
    lookup[n + 1:] = np.arange(n, 2 * n)

    group = symmetry_group(symmetry)
    images = np.empty((len(group), side * side), dtype=np.int64)
    conj = np.array([c for _, c in group])
    for k, elem in enumerate(group):
        u, v = _apply(elem, X, Y)
        images[k] = (lookup[u + n] * side + lookup[v + n]).ravel()

    rep = images.min(axis=0)
    hits = images == rep
    odd = np.any(hits & conj[:, None], axis=0)
    even = np.any(hits & ~conj[:, None], axis=0)

    representatives, orbit_flat = np.unique(rep, return_inverse=True)
    # an orbit is real as soon as one member is reached with both parities
    real = np.zeros(representatives.size, dtype=bool)
    np.logical_or.at(real, orbit_flat, odd & even)
    parity = odd & ~even
    parity &= ~real[orbit_flat]

    orbit_of = orbit_flat.reshape(side, side)
    parity = parity.reshape(side, side)
    for a in (orbit_of, parity, representatives, real):
        a.setflags(write=False)
    return OrbitSystem(n, symmetry, orbit_of, parity, representatives, real)


def sample_matrix(spec: EnsembleSpec, replicate: int = 0) -> HermitianMatrix:
    """Draw replicate number `replicate` of the ensemble described by `spec`.

    Complex orbits get real and imaginary parts ``N(0, 1/(4n))``; real orbits
    get ``N(0, 1/(2n))``.  The result depends only on
    ``(spec.master_seed, replicate)``.
    """
    validate_spec(spec)
    system = build_orbit_system(spec.symmetry, spec.n)
    a, b = rng.normal_pairs(spec.master_seed, replicate, np.arange(system.n_orbits))
    half = np.sqrt(1.0 / (4 * spec.n))
    values = np.where(system.real, a * np.sqrt(1.0 / (2 * spec.n)) + 0j, (a + 1j * b) * half)
    w = values[system.orbit_of]
    np.conjugate(w, out=w, where=system.parity)
    return HermitianMatrix(spec.n, w)


def class_image(entries: np.ndarray, symmetry: SymmetryClass) -> np.ndarray:
    """Matrix ``M`` with ``M[x, y] = W[sigma(x, y)]`` for the class map sigma."""
    symmetry = SymmetryClass.parse(symmetry)
    flip = slice(None, None, -1)
    if symmetry is SymmetryClass.PLAIN:
        return entries
    if symmetry is SymmetryClass.FLIP1:
        return entries.T[flip, flip]
    if symmetry is SymmetryClass.CENTRAL2:
        return entries[flip, flip]
    if symmetry is SymmetryClass.ROWMIRROR3:
        return entries[flip, :]
    # (x, y) -> (y, -x)
    return entries[:, flip].T


def validate_symmetry(w, symmetry: SymmetryClass) -> float:
    """Largest violation of Hermiticity or of the class constraint."""
    a = w.entries if isinstance(w, HermitianMatrix) else np.asarray(w)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
        raise PreconditionError(f"need a square matrix of even side, got {a.shape}")
    herm = np.max(np.abs(a - a.conj().T))
    sym = np.max(np.abs(a - class_image(a, symmetry)))
    return float(max(herm, sym))
