"""Hermitian eigensolvers, resolvents and the spectral functionals built on them.

Two dense solvers are provided: LAPACK through numpy (the default, used for
throughput) and a self-contained Householder tridiagonalisation followed by
implicit QL with Wilkinson shifts.  The structured solver uses the block
forms each symmetry class admits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (DomainError, HermitianMatrix, PreconditionError, SolverFailure, Spectrum,
                   SymmetryClass)
from .sampler import class_image, validate_symmetry

EPS = np.finfo(np.float64).eps
ZERO_TOL = 1e-8
STRUCTURE_TOL = 1e-12
MAX_QL_SWEEPS = 30


def _entries(w) -> np.ndarray:
    return w.entries if isinstance(w, HermitianMatrix) else np.asarray(w, dtype=np.complex128)


def _check_off_axis(z, what="z"):
    z = complex(z)
    if z.imag == 0.0:
        raise DomainError(f"{what} = {z} lies on the real axis")
    return z


# -- dense solvers ---------------------------------------------------------

def householder_tridiagonalize(a):
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns ``(d, e, Q)`` with ``a = Q T Q^H`` where ``T`` has diagonal `d`
    and sub/super-diagonal `e` (both real, ``e >= 0``).
    """
    a = np.array(a, dtype=np.complex128)
    m = a.shape[0]
    q = np.eye(m, dtype=np.complex128)
    for k in range(m - 2):
        x = a[k + 1:, k].copy()
        sigma = np.linalg.norm(x)
        if sigma == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * sigma
        v /= np.linalg.norm(v)
        a[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ a[k + 1:, :])
        a[:, k + 1:] -= 2.0 * np.outer(a[:, k + 1:] @ v, v.conj())
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
    d = a.diagonal().real.copy()
    sub = a.diagonal(-1).copy()
    # diagonal unitary that makes the off-diagonal real and nonnegative
    phases = np.ones(m, dtype=np.complex128)
    e = np.abs(sub)
    for k in range(m - 1):
        phases[k + 1] = phases[k] * (sub[k] / e[k] if e[k] != 0 else 1.0)
    return d, e, q * phases


def tridiagonal_ql(d, e, z=None):
    """Implicit QL with Wilkinson shifts on a real symmetric tridiagonal matrix.

    `d` (length m) and `e` (length m-1) are not modified.  If `z` is given its
    columns are rotated along, so passing the Householder basis yields the
    eigenvectors of the original matrix.  Eigenvalues come back unsorted.
    """
    d = np.array(d, dtype=np.float64)
    m = d.size
    e = np.append(np.asarray(e, dtype=np.float64), 0.0)
    if z is not None:
        z = np.array(z)
    for l in range(m):
        sweeps = 0
        while True:
            mm = l
            while mm < m - 1:
                dd = abs(d[mm]) + abs(d[mm + 1])
                if abs(e[mm]) <= EPS * dd:
                    break
                mm += 1
            if mm == l:
                break
            if sweeps == MAX_QL_SWEEPS:
                raise SolverFailure(f"QL did not converge for eigenvalue {l} in {MAX_QL_SWEEPS} sweeps")
            sweeps += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[mm] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(mm - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[mm] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    zi = z[:, i].copy()
                    z[:, i] = c * zi - s * z[:, i + 1]
                    z[:, i + 1] = s * zi + c * z[:, i + 1]
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[mm] = 0.0
    return d, z


def householder_eigh(a, want_basis=False):
    """Eigen-decomposition by Householder reduction and implicit QL."""
    d, e, q = householder_tridiagonalize(a)
    lam, vecs = tridiagonal_ql(d, e, q if want_basis else None)
    order = np.argsort(lam, kind="stable")
    return lam[order], (vecs[:, order] if want_basis else None)


def eigh(w, want_basis=False, method="lapack") -> Spectrum:
    """Spectrum of a Hermitian matrix.

    Parameters
    ----------
    w : HermitianMatrix or array_like
    want_basis : bool
        Also return orthonormal eigenvectors (columns of ``Spectrum.basis``).
    method : {"lapack", "householder"}
    """
    a = _entries(w)
    if method == "lapack":
        if want_basis:
            lam, vecs = np.linalg.eigh(a)
        else:
            lam, vecs = np.linalg.eigvalsh(a), None
    elif method == "householder":
        lam, vecs = householder_eigh(a, want_basis)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Spectrum(lam, vecs)


# -- structured solver -----------------------------------------------------

def _quadrants(a):
    """Blocks ``P[x,y]=W[x,y]``, ``Q=W[x,-y]``, ``R=W[-x,y]``, ``S=W[-x,-y]`` over x,y > 0."""
    n = a.shape[0] // 2
    neg = slice(n - 1, None, -1) if n > 0 else slice(0, 0)
    pos_ = slice(n, None)
    return a[pos_, pos_], a[pos_, neg], a[neg, pos_], a[neg, neg]


def flip1_real_form(a) -> np.ndarray:
    """Real symmetric matrix unitarily similar to a Flip1-symmetric ``a``.

    Uses the basis ``(e_x + e_-x)/sqrt 2`` and ``i (e_x - e_-x)/sqrt 2``, x > 0,
    whose vectors are fixed by the antiunitary symmetry of the class.
    """
    p, q, r, s = _quadrants(a)
    top = np.hstack([(p + q + r + s).real, -(p - q + r - s).imag])
    bottom = np.hstack([(p + q - r - s).imag, (p - q - r + s).real])
    return 0.5 * np.vstack([top, bottom])


def central_blocks(a):
    """Blocks of a centrally symmetric matrix on the even and odd subspaces."""
    p, q, _, _ = _quadrants(a)
    return p + q, p - q


def eigh_structured(w, symmetry: SymmetryClass, check=True) -> Spectrum:
    """Eigenvalues using the block structure forced by the symmetry class.

    Central2 splits into two ``n x n`` Hermitian blocks; RowMirror3 has
    spectrum ``2 eig(A)`` plus ``n`` zeros with ``A`` the negative-site block;
    Flip1 is unitarily similar to a real symmetric matrix; Quarter4 splits
    into a real symmetric and a purely imaginary antisymmetric block.  Plain
    falls back to the dense solver.
    """
    symmetry = SymmetryClass.parse(symmetry)
    a = _entries(w)
    if check:
        dev = validate_symmetry(a, symmetry)
        if dev > STRUCTURE_TOL:
            raise PreconditionError(f"matrix violates {symmetry} symmetry by {dev:.3g}")
    n = a.shape[0] // 2
    if symmetry is SymmetryClass.CENTRAL2:
        even, odd = central_blocks(a)
        lam = np.concatenate([np.linalg.eigvalsh(even), np.linalg.eigvalsh(odd)])
    elif symmetry is SymmetryClass.ROWMIRROR3:
        lam = np.concatenate([2.0 * np.linalg.eigvalsh(a[:n, :n]), np.zeros(n)])
    elif symmetry is SymmetryClass.FLIP1:
        lam = np.linalg.eigvalsh(flip1_real_form(a))
    elif symmetry is SymmetryClass.QUARTER4:
        even, odd = central_blocks(a)
        lam = np.concatenate([np.linalg.eigvalsh(even.real), np.linalg.eigvalsh(odd)])
    else:
        lam = np.linalg.eigvalsh(a)
    return Spectrum(np.sort(lam))


# -- resolvents ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ResolventMatrix:
    """``G(z) = (W - z)^-1`` stored densely in signed-site order."""

    z: complex
    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0] // 2

    def defect(self, w) -> float:
        """``max |(W - z) G - I|``."""
        a = _entries(w)
        m = a.shape[0]
        return float(np.max(np.abs((a - self.z * np.eye(m)) @ self.entries - np.eye(m))))

    def g(self) -> complex:
        return complex(np.trace(self.entries)) / self.entries.shape[0]

    def ghat(self) -> complex:
        return anti_trace(self.entries)


def resolvent_matrix(w, z) -> ResolventMatrix:
    """Resolvent by LU factorisation with partial pivoting."""
    z = complex(z)
    if abs(z.imag) < 1e-12:
        raise DomainError(f"z = {z} is too close to the real axis")
    a = _entries(w)
    m = a.shape[0]
    lu = scipy.linalg.lu_factor(a - z * np.eye(m), check_finite=False)
    g = scipy.linalg.lu_solve(lu, np.eye(m, dtype=np.complex128), check_finite=False)
    return ResolventMatrix(z, g)


def resolvent_from_basis(spectrum: Spectrum, z) -> ResolventMatrix:
    """Resolvent from an eigen-decomposition; cheap when scanning many z."""
    z = _check_off_axis(z)
    if spectrum.basis is None:
        raise PreconditionError("spectrum carries no eigenbasis")
    v = spectrum.basis
    return ResolventMatrix(z, (v / (spectrum.eigenvalues - z)) @ v.conj().T)


def stieltjes_from_spectrum(spectrum, z) -> complex:
    """Normalised trace of the resolvent, ``(1/2n) sum 1/(lambda_i - z)``."""
    z = _check_off_axis(z)
    lam = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    return complex(np.mean(1.0 / (lam - z)))


def trace_resolvent_square(spectrum, z) -> complex:
    """``(1/2n) Tr G(z)^2``, the z-derivative of the Stieltjes transform."""
    z = _check_off_axis(z)
    lam = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    return complex(np.mean(1.0 / (lam - z) ** 2))


def anti_trace(m, n=None) -> complex:
    """``(1/2n) sum_x M[x, -x]``."""
    m = m.entries if isinstance(m, (ResolventMatrix, HermitianMatrix)) else np.asarray(m)
    side = m.shape[0]
    if m.ndim != 2 or side != m.shape[1] or side % 2 or (n is not None and side != 2 * n):
        raise PreconditionError(f"anti_trace needs a square matrix of side 2n, got {m.shape}")
    return complex(np.trace(m[:, ::-1])) / side


def atom_mass_estimate(spectrum, tol=ZERO_TOL) -> float:
    """Fraction of eigenvalues with ``|lambda| < tol``."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    lam = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    return np.count_nonzero(np.abs(lam) < tol) / lam.size


# -- exact per-sample identities -------------------------------------------

RESOLVENT_SYMMETRY_CLASSES = (SymmetryClass.FLIP1, SymmetryClass.CENTRAL2,
                              SymmetryClass.ROWMIRROR3)


def resolvent_symmetry_residual(g: ResolventMatrix, symmetry: SymmetryClass) -> float:
    """Deviation from the symmetry the class passes on to its resolvent.

    Flip1 and Central2 inherit the matrix symmetry unchanged; RowMirror3
    picks up ``-(delta_jk - delta_-jk)/z``.
    """
    symmetry = SymmetryClass.parse(symmetry)
    if symmetry not in RESOLVENT_SYMMETRY_CLASSES:
        raise PreconditionError(f"no resolvent symmetry for {symmetry}")
    a = g.entries
    diff = a - class_image(a, symmetry)
    if symmetry is SymmetryClass.ROWMIRROR3:
        m = a.shape[0]
        diff = diff + (np.eye(m) - np.eye(m)[::-1]) / g.z
    return float(np.max(np.abs(diff)))


def identity_residuals(w, symmetry: SymmetryClass, probes) -> dict:
    """Largest residual of every exact identity that applies to `w`.

    Keys present depend on the class: ``resolvent_defect``, ``trace_g2``
    (derivative of g, checked against the eigenvalues), ``g1g2``,
    ``resolvent_symmetry`` (classes 1-3), ``antidiagonal`` and
    ``ghat_minus_g`` (class 3).  Schwartz-type bounds are reported as
    ``bound_*`` margins that must stay nonnegative.
    """
    symmetry = SymmetryClass.parse(symmetry)
    a = _entries(w)
    m = a.shape[0]
    lam = np.linalg.eigvalsh(a)
    res = {"resolvent_defect": 0.0, "trace_g2": 0.0, "g1g2": 0.0}
    margins = {"bound_g": np.inf, "bound_trace_g2": np.inf, "bound_trace_pg": np.inf}
    if symmetry in RESOLVENT_SYMMETRY_CLASSES:
        res["resolvent_symmetry"] = 0.0
    if symmetry is SymmetryClass.ROWMIRROR3:
        res["antidiagonal"] = 0.0
        res["ghat_minus_g"] = 0.0
    gs = {}
    for z in probes:
        z = _check_off_axis(z, "probe")
        g = resolvent_matrix(a, z)
        gs[z] = g
        y2 = z.imag ** 2
        res["resolvent_defect"] = max(res["resolvent_defect"], g.defect(a))
        tr2 = np.trace(g.entries @ g.entries) / m
        res["trace_g2"] = max(res["trace_g2"], abs(tr2 - trace_resolvent_square(lam, z)))
        # P[x, y] = G[y, -x]
        pmat = g.entries[::-1, :].T
        margins["bound_g"] = min(margins["bound_g"], 1 / abs(z.imag) - abs(g.g()))
        margins["bound_trace_g2"] = min(margins["bound_trace_g2"], 1 / y2 - abs(tr2))
        margins["bound_trace_pg"] = min(margins["bound_trace_pg"],
                                        1 / y2 - abs(np.trace(pmat @ g.entries) / m))
        if "resolvent_symmetry" in res:
            res["resolvent_symmetry"] = max(res["resolvent_symmetry"],
                                            resolvent_symmetry_residual(g, symmetry))
        if "ghat_minus_g" in res:
            res["ghat_minus_g"] = max(res["ghat_minus_g"], abs(g.ghat() - g.g() - 1 / z))
    zs = list(gs)
    for i, z1 in enumerate(zs):
        for z2 in zs:
            if z2 == z1:
                continue
            g1, g2 = gs[z1].entries, gs[z2].entries
            prod = g1 @ g1 @ g2
            lhs = np.trace(prod) / m
            t1 = np.trace(g1 @ g1) / m
            rhs = (t1 - (gs[z1].g() - gs[z2].g()) / (z1 - z2)) / (z1 - z2)
            res["g1g2"] = max(res["g1g2"], abs(lhs - rhs))
            if "antidiagonal" in res:
                anti = anti_trace(prod)
                res["antidiagonal"] = max(res["antidiagonal"],
                                          abs(anti - lhs - 1 / (z1 ** 2 * z2)))
    out = {k: float(v) for k, v in res.items()}
    out.update({k: float(v) for k, v in margins.items()})
    return out
