"""Limiting spectral laws and their Stieltjes transforms.

Three laws are provided:

* the semicircle on ``[-2, 2]``, whose transform solves ``f^2 + z f + 1 = 0``;
* the case-3 law, whose transform solves ``2 f^2 + (z + 1/z) f + 1 = 0``.
  Its continuous part is ``sqrt(6 - l^2 - l^-2) / (4 pi)`` on
  ``lambda_- <= |l| <= lambda_+`` with ``lambda_+- = sqrt(3 +- 2 sqrt 2)``,
  plus an atom at zero;
* the block law of the row-mirror ensemble: half the mass at zero, half a
  semicircle on ``[-2 sqrt 2, 2 sqrt 2]``.

Transforms are evaluated by solving the defining quadratic and keeping the
root that maps the upper half-plane into itself.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import BranchAmbiguityError, DomainError, NumericalError

LAMBDA_MINUS = math.sqrt(3 - 2 * math.sqrt(2))
LAMBDA_PLUS = math.sqrt(3 + 2 * math.sqrt(2))
BLOCK_EDGE = 2 * math.sqrt(2)
PRINTED_CASE3_ATOM = 0.25
ROOT_TOL = 1e-12
DENSITY_EPS = (1e-4, 5e-5, 2.5e-5)
RESIDUE_YS = (1e-3, 1e-4, 1e-5)


class Rule(enum.Enum):
    POSITIVE_IMAGINARY_PART = "PositiveImaginaryPart"
    ASYMPTOTIC_CONTINUATION = "AsymptoticContinuation"


@dataclass(frozen=True)
class RootSelection:
    z: complex
    candidates: tuple
    chosen: complex
    rule: Rule


def quadratic_roots(a, b, c):
    """Both roots of ``a f^2 + b f + c`` without cancellation; works on arrays."""
    a, b, c = (np.asarray(v, dtype=np.complex128) for v in (a, b, c))
    disc = np.sqrt(b * b - 4 * a * c)
    # pick the sign that avoids subtracting nearly equal numbers
    flip = (b.real * disc.real + b.imag * disc.imag) < 0
    disc = np.where(flip, -disc, disc)
    q = -0.5 * (b + disc)
    safe_q = np.where(q == 0, 1.0, q)
    r1 = q / a
    r2 = np.where(q == 0, 0.0, c / safe_q)
    return r1, r2


def _newton_polish(coeffs, f):
    a, b, c = coeffs
    deriv = 2 * a * f + b
    step = np.where(deriv != 0, (a * f * f + b * f + c) / np.where(deriv != 0, deriv, 1), 0)
    return f - step


def select_root(coeffs: Callable, z, tol=ROOT_TOL, continuation=True) -> RootSelection:
    """Nevanlinna root of the quadratic ``coeffs(z)`` at a single point.

    The root with positive imaginary part is taken when exactly one
    qualifies.  Otherwise the branch is followed down a vertical path from
    far up the imaginary direction, where it behaves like ``-1/z``.
    """
    z = complex(z)
    if z.imag == 0.0:
        raise DomainError(f"z = {z} lies on the real axis")
    if z.imag < 0:
        sel = select_root(coeffs, z.conjugate(), tol, continuation)
        return RootSelection(z, tuple(r.conjugate() for r in sel.candidates),
                             sel.chosen.conjugate(), sel.rule)
    roots = tuple(complex(r) for r in quadratic_roots(*coeffs(z)))
    scale = max(1.0, *(abs(r) for r in roots))
    qualifying = [r for r in roots if r.imag > tol * scale]
    if len(qualifying) == 1:
        chosen = complex(_newton_polish(coeffs(z), qualifying[0]))
        return RootSelection(z, roots, chosen, Rule.POSITIVE_IMAGINARY_PART)
    if not continuation:
        raise BranchAmbiguityError(f"{len(qualifying)} roots with Im f > 0 at z = {z}")
    if abs(roots[0] - roots[1]) <= tol * scale:
        raise BranchAmbiguityError(f"roots coincide at z = {z}")
    chosen = _continue_branch(coeffs, z)
    chosen = min(roots, key=lambda r: abs(r - chosen))
    return RootSelection(z, roots, chosen, Rule.ASYMPTOTIC_CONTINUATION)


def _continue_branch(coeffs, z, steps=400):
    y_top = max(10.0, 4.0 * abs(z))
    ys = np.geomspace(y_top, z.imag, steps)
    current = -1.0 / complex(z.real, y_top)
    for y in ys:
        r1, r2 = (complex(r) for r in quadratic_roots(*coeffs(complex(z.real, y))))
        current = r1 if abs(r1 - current) <= abs(r2 - current) else r2
    return current


def nevanlinna_roots(coeffs: Callable, z, tol=ROOT_TOL):
    """Vectorised :func:`select_root`; points off the fast path are resolved one by one."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.imag == 0):
        raise DomainError("stieltjes transform is undefined on the real axis")
    zu = np.where(z.imag > 0, z, z.conj())
    cf = coeffs(zu)
    r1, r2 = quadratic_roots(*cf)
    scale = np.maximum(1.0, np.maximum(np.abs(r1), np.abs(r2)))
    q1 = r1.imag > tol * scale
    q2 = r2.imag > tol * scale
    f = np.where(q1, r1, r2)
    f = np.array(_newton_polish(cf, f), dtype=np.complex128)
    ambiguous = q1 == q2
    if np.any(ambiguous):
        for idx in zip(*np.nonzero(ambiguous)) if f.ndim else [()]:
            f[idx] = select_root(coeffs, zu[idx], tol).chosen
    f = np.where(z.imag > 0, f, f.conj())
    return f[()] if f.ndim == 0 else f


def _semicircle_coeffs(z):
    return 1.0, z, 1.0


def _case3_coeffs(z):
    return 2.0, z + 1.0 / z, 1.0


def _block_coeffs(z):
    return 2.0, z, 1.0


def _as_output(f, z):
    return complex(f) if np.ndim(z) == 0 else f


def semicircle_stieltjes(z):
    """Stieltjes transform of the semicircle law on ``[-2, 2]``."""
    return _as_output(nevanlinna_roots(_semicircle_coeffs, z), z)


def case3_stieltjes(z, strict=False):
    """Nevanlinna solution of ``2 f^2 + (z + 1/z) f + 1 = 0``.

    With `strict` the continuation fallback is disabled and a point where
    zero or two roots have positive imaginary part raises
    :class:`BranchAmbiguityError`.
    """
    if np.any(np.asarray(z) == 0):
        raise DomainError("z = 0 is a pole of the case-3 equation")
    if strict:
        if np.ndim(z) != 0:
            return np.array([select_root(_case3_coeffs, v, continuation=False).chosen
                             for v in np.ravel(z)]).reshape(np.shape(z))
        return select_root(_case3_coeffs, z, continuation=False).chosen
    return _as_output(nevanlinna_roots(_case3_coeffs, z), z)


def blocklaw_stieltjes(z):
    """``(h(z) - 1/z) / 2`` with ``h`` the Nevanlinna root of ``2 h^2 + z h + 1 = 0``."""
    z_arr = np.asarray(z, dtype=np.complex128)
    h = nevanlinna_roots(_block_coeffs, z_arr)
    return _as_output(0.5 * (h - 1.0 / z_arr), z)


# -- densities and distribution functions -----------------------------------

def semicircle_density(lam):
    lam = np.asarray(lam, dtype=np.float64)
    out = np.sqrt(np.clip(4.0 - lam * lam, 0.0, None)) / (2 * np.pi)
    return out[()] if out.ndim == 0 else out


def semicircle_cdf(lam):
    lam = np.asarray(lam, dtype=np.float64)
    x = np.clip(lam, -2.0, 2.0)
    out = 0.5 + x * np.sqrt(4.0 - x * x) / (4 * np.pi) + np.arcsin(x / 2) / np.pi
    out = np.where(lam <= -2, 0.0, np.where(lam >= 2, 1.0, out))
    return out[()] if out.ndim == 0 else out


def _case3_radicand(lam, printed=False):
    with np.errstate(divide="ignore"):
        inv2 = 1.0 / (lam * lam)
    return 6.0 - (lam * lam - inv2) if printed else 6.0 - (lam * lam + inv2)


def case3_density(lam, printed=False):
    """Continuous part of the case-3 law.

    ``printed=True`` uses the radicand ``6 - (l^2 - l^-2)``, which does not
    vanish at the support edges; the default ``6 - (l^2 + l^-2)`` does.
    """
    lam = np.asarray(lam, dtype=np.float64)
    a = np.abs(lam)
    inside = (a > LAMBDA_MINUS) & (a < LAMBDA_PLUS)
    safe = np.where(inside, lam, 1.0)
    out = np.where(inside, np.sqrt(np.clip(_case3_radicand(safe, printed), 0.0, None)), 0.0)
    out = out / (4 * np.pi)
    return out[()] if out.ndim == 0 else out


def _case3_antiderivative(u):
    # integral of sqrt(-u^2 + 6u - 1) / u du, u = lambda^2
    r = np.clip(-u * u + 6 * u - 1, 0.0, None)
    s = 2 * np.sqrt(r)
    return np.sqrt(r) + 3 * np.arctan2(2 * u - 6, s) - np.arctan2(6 * u - 2, s)


def _case3_positive_mass(a):
    """Continuous mass on ``[lambda_-, a]`` for ``a >= 0``."""
    a = np.clip(a, LAMBDA_MINUS, LAMBDA_PLUS)
    lo = _case3_antiderivative(LAMBDA_MINUS ** 2)
    out = (_case3_antiderivative(a * a) - lo) / (8 * np.pi)
    return np.where(a >= LAMBDA_PLUS, 0.25, np.where(a <= LAMBDA_MINUS, 0.0, out))


def case3_cdf(lam, atom=0.5):
    lam = np.asarray(lam, dtype=np.float64)
    a = np.abs(lam)
    m = _case3_positive_mass(a)
    cont = np.where(lam >= 0, 0.25 + m, 0.25 - m)
    out = cont + np.where(lam >= 0, atom, 0.0)
    return out[()] if out.ndim == 0 else out


def blocklaw_density(lam):
    lam = np.asarray(lam, dtype=np.float64)
    out = 0.5 * np.sqrt(np.clip(8.0 - lam * lam, 0.0, None)) / (4 * np.pi)
    return out[()] if out.ndim == 0 else out


def blocklaw_cdf(lam):
    lam = np.asarray(lam, dtype=np.float64)
    out = 0.5 * semicircle_cdf(lam / math.sqrt(2)) + np.where(lam >= 0, 0.5, 0.0)
    return out[()] if out.ndim == 0 else out


def density_from_stieltjes(stieltjes, lam, eps=DENSITY_EPS):
    """``lim Im f(l + i eps) / pi`` by Richardson extrapolation over `eps`.

    A quadratic in ``eps`` is fitted through the samples and evaluated at 0.
    """
    lam = np.asarray(lam, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    vals = np.stack([np.imag(stieltjes(lam + 1j * e)) / np.pi for e in eps])
    weights = _extrapolation_weights(eps)
    out = np.tensordot(weights, vals, axes=1)
    return out[()] if np.ndim(out) == 0 else out


def _extrapolation_weights(xs):
    # Lagrange weights for evaluating the interpolating polynomial at 0
    xs = np.asarray(xs, dtype=np.float64)
    w = np.ones(xs.size)
    for i in range(xs.size):
        for j in range(xs.size):
            if i != j:
                w[i] *= xs[j] / (xs[j] - xs[i])
    return w


def atom_residue(stieltjes, at=0.0, ys=RESIDUE_YS, spread_tol=1e-4) -> float:
    """Mass of a point at `at`: ``lim y Im f(at + i y)`` as ``y -> 0+``."""
    ys = np.asarray(ys, dtype=np.float64)
    samples = np.array([y * complex(stieltjes(complex(at, y))).imag for y in ys])
    estimate = float(_extrapolation_weights(ys) @ samples)
    spread = abs(estimate - samples[np.argmin(ys)])
    if spread > spread_tol:
        raise NumericalError(f"residue extrapolation did not settle (spread {spread:.3g})")
    return estimate


def case3_atom_residue() -> float:
    """Mass of the case-3 law at zero, from the pole of its transform."""
    return atom_residue(case3_stieltjes)


# -- quadrature -------------------------------------------------------------

def adaptive_simpson(f, a, b, tol=1e-10, max_depth=60):
    """Adaptive Simpson quadrature with Richardson correction."""
    if a == b:
        return 0.0

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4 * fm + fb)

    fa, fb = float(f(a)), float(f(b))
    m = 0.5 * (a + b)
    fm = float(f(m))
    whole = simpson(fa, fm, fb, a, b)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a, b, fa, fm, fb, whole, tol_, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = float(f(lm)), float(f(rm))
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15 * tol_:
            total += left + right + delta / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, tol_ / 2, depth + 1))
            stack.append((m, b, fm, frm, fb, right, tol_ / 2, depth + 1))
    return total


# -- law bundles ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralLaw:
    """A limiting spectral law.

    `density` is the continuous part per unit lambda; `atoms` lists
    ``(location, mass)`` pairs; `edges` are the support endpoints in
    ascending order (pairs of consecutive edges bound support intervals).
    """

    name: str
    density: Callable
    cdf: Callable
    stieltjes: Callable
    atoms: tuple = ()
    edges: tuple = ()
    provenance: str = "derived-closed-form"
    notes: dict = field(default_factory=dict)

    @property
    def intervals(self):
        e = self.edges
        return [(e[i], e[i + 1]) for i in range(0, len(e) - 1, 2)]

    def atom_mass(self) -> float:
        return float(sum(m for _, m in self.atoms))

    def cdf_left(self, lam):
        """Left limit ``P(X < lam)`` of the distribution function."""
        out = np.asarray(self.cdf(lam), dtype=np.float64)
        for loc, mass in self.atoms:
            out = out - np.where(np.asarray(lam) == loc, mass, 0.0)
        return out[()] if out.ndim == 0 else out

    def continuous_mass(self, tol=1e-10) -> float:
        return sum(adaptive_simpson(self.density, a, b, tol) for a, b in self.intervals)

    def cdf_by_quadrature(self, lam, tol=1e-10) -> float:
        """Distribution function by direct quadrature of the density."""
        lam = float(lam)
        total = sum(m for loc, m in self.atoms if loc <= lam)
        for a, b in self.intervals:
            if lam > a:
                total += adaptive_simpson(self.density, a, min(lam, b), tol)
        return total


def semicircle_law() -> SpectralLaw:
    return SpectralLaw("semicircle", semicircle_density, semicircle_cdf, semicircle_stieltjes,
                       atoms=(), edges=(-2.0, 2.0))


@functools.lru_cache(maxsize=None)
def case3_paper_law(variant="solved") -> SpectralLaw:
    """The case-3 limiting law.

    ``variant="solved"`` is self-consistent with its quadratic: radicand
    ``6 - (l^2 + l^-2)`` and the atom mass read off the pole of the
    transform (0.5).  ``variant="printed"`` keeps the radicand
    ``6 - (l^2 - l^-2)`` and atom 1/4 for side-by-side comparison; it is not a
    probability measure.
    """
    edges = (-LAMBDA_PLUS, -LAMBDA_MINUS, LAMBDA_MINUS, LAMBDA_PLUS)
    if variant == "solved":
        atom = case3_atom_residue()
        return SpectralLaw("case3", case3_density, functools.partial(case3_cdf, atom=atom),
                           case3_stieltjes, atoms=((0.0, atom),), edges=edges,
                           provenance="derived-oracle")
    if variant == "printed":
        dens = functools.partial(case3_density, printed=True)
        law = SpectralLaw("case3-printed", dens, lambda lam: np.nan, case3_stieltjes,
                          atoms=((0.0, PRINTED_CASE3_ATOM),), edges=edges,
                          provenance="paper-printed")
        object.__setattr__(law, "cdf", np.vectorize(law.cdf_by_quadrature, otypes=[float]))
        return law
    raise ValueError(f"unknown variant {variant!r}")


def blocklaw() -> SpectralLaw:
    """Half the mass at zero, half a semicircle on ``[-2 sqrt 2, 2 sqrt 2]``."""
    return SpectralLaw("blocklaw", blocklaw_density, blocklaw_cdf, blocklaw_stieltjes,
                       atoms=((0.0, 0.5),), edges=(-BLOCK_EDGE, BLOCK_EDGE))


LAWS = {"semicircle": semicircle_law, "case3": case3_paper_law,
        "case3-printed": functools.partial(case3_paper_law, "printed"), "blocklaw": blocklaw}


def get_law(name: str) -> SpectralLaw:
    try:
        return LAWS[name]()
    except KeyError:
        raise ValueError(f"unknown law {name!r}; choose from {sorted(LAWS)}") from None


MAX_MOMENT = 8


def law_moment(law: SpectralLaw, k: int, tol=1e-9) -> float:
    """``k``-th moment: atoms plus the integral of ``l^k`` against the density."""
    if k < 0 or k > MAX_MOMENT:
        raise ValueError(f"unsupported-order: moments are available for 0 <= k <= {MAX_MOMENT}")
    total = sum(loc ** k * m for loc, m in law.atoms)
    for a, b in law.intervals:
        total += adaptive_simpson(lambda t: t ** k * law.density(t), a, b, tol)
    return float(total)


def moments_from_stieltjes(stieltjes, kmax=MAX_MOMENT, radius=5.0, points=512):
    """Moments from the Laurent expansion ``f(z) = -sum m_k z^-(k+1)`` at infinity.

    The contour integral over ``|z| = radius`` is done with the trapezoidal
    rule at angles offset from the real axis.
    """
    theta = 2 * np.pi * (np.arange(points) + 0.5) / points
    z = radius * np.exp(1j * theta)
    f = np.asarray(stieltjes(z))
    return np.array([-np.mean(f * z ** (k + 1)) for k in range(kmax + 1)])
