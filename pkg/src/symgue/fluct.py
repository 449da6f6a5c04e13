"""Correlator formulas and Monte Carlo estimators for Stieltjes-transform statistics."""
from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import DomainError, EnsembleSpec, SampleSizeError, SymmetryClass, validate_spec
from .eig import ZERO_TOL, anti_trace, eigh_structured, identity_residuals, resolvent_matrix
from .laws import case3_stieltjes, semicircle_stieltjes
from .sampler import sample_matrix

CONFLUENT_GAP = 1e-6


class CoincidentPointError(DomainError):
    pass


def _f_prime_semicircle(z, f):
    return -f / (z + 2 * f)


def _f_prime_case3(z, f):
    return -f * (1 - z ** -2) / (z + 1 / z + 4 * f)


def S_goe(z1, z2) -> complex:
    """Limit of ``(2n)^2 E[g0(z1) g0(z2)]`` for the GOE-like classes."""
    z1, z2 = complex(z1), complex(z2)
    if z1.imag == 0 or z2.imag == 0:
        raise DomainError("probes must lie off the real axis")
    f1, f2 = semicircle_stieltjes(z1), semicircle_stieltjes(z2)
    if abs(z1 - z2) < CONFLUENT_GAP:
        slope = _f_prime_semicircle(z1, f1)
    else:
        slope = (f1 - f2) / (z1 - z2)
    return 2.0 / ((1 - f1 * f1) * (1 - f2 * f2)) * slope * slope


def S_gue(z1, z2) -> complex:
    """GUE correlator: half of :func:`S_goe`."""
    return S_goe(z1, z2) / 2


def C_case3(z1, z2) -> complex:
    """Case-3 correlator coefficient, evaluated term by term as printed.

    The first term diverges like ``(z1 - z2)^-2``, so coincident probes are
    rejected.
    """
    z1, z2 = complex(z1), complex(z2)
    if z1.imag == 0 or z2.imag == 0:
        raise DomainError("probes must lie off the real axis")
    if abs(z1 - z2) < CONFLUENT_GAP:
        raise CoincidentPointError(f"C_case3 diverges at z1 = z2 (|z1 - z2| = {abs(z1 - z2):.3g})")
    f1, f2 = case3_stieltjes(z1), case3_stieltjes(z2)
    first = 2 * (f1 * f1 + f2 * f2) / (f1 * f2 * (z1 - z2) ** 2)
    second = (z2 * f2 + z1 * f1) / (2 * z1 ** 2 * z2 ** 2 * f1 * f2)
    denom = (z1 + 1 / z1 + 4 * f1) * (z2 + 1 / z2 + 4 * f2)
    return (first + second) / denom


def tr_g2_limit(lawkind: str, z, as_printed=False) -> complex:
    """Limit of ``E (1/2n) Tr G(z)^2``.

    By default this is the derivative of the law's Stieltjes transform.
    ``as_printed=True`` returns the alternative closed forms
    ``f/(1 - f^2)`` (semicircle) and
    ``-(f/z)(1 - z^-2)/(1 + f/z + z^-2)`` (case 3) kept for comparison.
    """
    z = complex(z)
    if z.imag == 0:
        raise DomainError("z must lie off the real axis")
    if lawkind == "semicircle":
        f = semicircle_stieltjes(z)
        return f / (1 - f * f) if as_printed else _f_prime_semicircle(z, f)
    if lawkind == "case3":
        f = case3_stieltjes(z)
        if as_printed:
            return -(f / z) * (1 - z ** -2) / (1 + f / z + z ** -2)
        return _f_prime_case3(z, f)
    raise ValueError(f"unknown law kind {lawkind!r}")


def theory_correlator(symmetry: SymmetryClass, z1, z2):
    """``(value, provenance, asserted)`` of the predicted ``(2n)^2 F_n`` for a class."""
    symmetry = SymmetryClass.parse(symmetry)
    if symmetry in (SymmetryClass.FLIP1, SymmetryClass.CENTRAL2):
        return S_goe(z1, z2), "derived-closed-form", True
    if symmetry in (SymmetryClass.QUARTER4, SymmetryClass.PLAIN):
        return S_gue(z1, z2), "derived-closed-form", True
    return C_case3(z1, z2), "paper-printed", False


# -- Monte Carlo -------------------------------------------------------------

EXTRAS = ("anti_trace", "atoms", "max_abs", "trace_g2", "identities")


@dataclass(eq=False)
class ReplicateRecord:
    """Per-replicate observations; `g_values` maps each probe to g(probe)."""

    replicate: int
    size_2n: int
    symmetry: SymmetryClass
    g_values: dict
    extras: dict = field(default_factory=dict)


def _one_replicate(spec: EnsembleSpec, r: int, probes, extras) -> ReplicateRecord:
    w = sample_matrix(spec, r)
    lam = eigh_structured(w, spec.symmetry, check=False).eigenvalues
    inv = 1.0 / (lam[None, :] - np.asarray(probes)[:, None])
    g = inv.mean(axis=1)
    rec = ReplicateRecord(r, spec.side, spec.symmetry, {z: complex(v) for z, v in zip(probes, g)})
    if "atoms" in extras:
        rec.extras["atoms"] = int(np.count_nonzero(np.abs(lam) < ZERO_TOL))
    if "max_abs" in extras:
        rec.extras["max_abs"] = float(np.max(np.abs(lam)))
    if "trace_g2" in extras:
        rec.extras["trace_g2"] = {z: complex(v) for z, v in zip(probes, (inv * inv).mean(axis=1))}
    if "anti_trace" in extras:
        rec.extras["anti_trace"] = {z: anti_trace(resolvent_matrix(w, z)) for z in probes}
    if "identities" in extras:
        rec.extras["identities"] = identity_residuals(w, spec.symmetry, probes)
    return rec


def mc_run(spec: EnsembleSpec, probes, replicates: int, extras=(), threads: int = 1,
           first_replicate: int = 0) -> list:
    """Sample `replicates` matrices and record g at every probe.

    Replicate ``r`` is drawn from ``(spec.master_seed, r)`` alone, so the
    output does not depend on `threads`.  BLAS is pinned to one thread while
    the workers run.
    """
    validate_spec(spec)
    probes = [complex(z) for z in probes]
    if any(z.imag == 0 for z in probes):
        raise DomainError("probes must lie off the real axis")
    if replicates < 2:
        raise SampleSizeError("mc_run needs at least 2 replicates")
    unknown = set(extras) - set(EXTRAS)
    if unknown:
        raise ValueError(f"unknown extras {sorted(unknown)}")
    indices = range(first_replicate, first_replicate + replicates)
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=1):
        if threads <= 1:
            return [_one_replicate(spec, r, probes, extras) for r in indices]
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda r: _one_replicate(spec, r, probes, extras), indices))


def _series(records, z, key="g"):
    z = complex(z)
    try:
        if key == "g":
            return np.array([rec.g_values[z] for rec in records])
        return np.array([rec.extras[key][z] for rec in records])
    except KeyError:
        raise KeyError(f"probe {z} ({key}) missing from records") from None


class MeanEstimate(NamedTuple):
    value: complex
    stderr: complex
    """Standard errors of the real part (``.real``) and imaginary part (``.imag``)."""


def mc_mean(records, z, key="g") -> MeanEstimate:
    """Sample mean of g (or ``key="anti_trace"``/``"trace_g2"``) with jackknife errors."""
    if len(records) < 2:
        raise SampleSizeError("need at least 2 records")
    x = _series(records, z, key)
    r = x.size
    # delete-one jackknife of the mean reduces to s / sqrt(R)
    loo = (x.sum() - x) / (r - 1)
    var_re = (r - 1) / r * np.sum((loo.real - loo.real.mean()) ** 2)
    var_im = (r - 1) / r * np.sum((loo.imag - loo.imag.mean()) ** 2)
    return MeanEstimate(complex(x.mean()), complex(np.sqrt(var_re), np.sqrt(var_im)))


@dataclass(frozen=True)
class CovarianceEstimate:
    """Estimate of ``E[g0(z1) g0(z2)]`` (no conjugation) with its jackknife error."""

    z1: complex
    z2: complex
    value: complex
    stderr: float
    replicates: int


MIN_COVARIANCE_RECORDS = 16


def covariance_from_series(x1, x2, z1=0j, z2=0j) -> CovarianceEstimate:
    x1, x2 = np.asarray(x1, dtype=np.complex128), np.asarray(x2, dtype=np.complex128)
    r = x1.size
    if r < MIN_COVARIANCE_RECORDS:
        raise SampleSizeError(f"covariance needs at least {MIN_COVARIANCE_RECORDS} records, got {r}")
    s1, s2, s12 = x1.sum(), x2.sum(), (x1 * x2).sum()
    value = s12 / r - (s1 / r) * (s2 / r)
    loo = (s12 - x1 * x2) / (r - 1) - ((s1 - x1) / (r - 1)) * ((s2 - x2) / (r - 1))
    var = (r - 1) / r * np.sum(np.abs(loo - loo.mean()) ** 2)
    return CovarianceEstimate(complex(z1), complex(z2), complex(value), float(np.sqrt(var)), r)


def mc_covariance(records, z1, z2) -> CovarianceEstimate:
    """``(1/R) sum g(z1) g(z2) - mean g(z1) mean g(z2)``."""
    if len(records) < MIN_COVARIANCE_RECORDS:
        raise SampleSizeError(f"covariance needs at least {MIN_COVARIANCE_RECORDS} records")
    return covariance_from_series(_series(records, z1), _series(records, z2), z1, z2)


def ks_distance(sorted_samples, cdf, atoms=()) -> float:
    """Kolmogorov-Smirnov distance between the sample and a distribution function.

    For a continuous `cdf` this is ``max_i max(|i/N - F(x_i)|, |(i-1)/N - F(x_i)|)``.
    Tied samples and `atoms` (``(location, mass)`` pairs of the target,
    with `cdf` right-continuous) are compared through left limits.
    """
    x = np.asarray(sorted_samples, dtype=np.float64)
    if x.size == 0:
        raise DomainError("empty sample")
    if np.any(np.diff(x) < 0):
        raise DomainError("samples must be sorted ascending")
    n = x.size
    values, first, counts = np.unique(x, return_index=True, return_counts=True)
    last = first + counts
    f = np.asarray(cdf(values), dtype=np.float64)
    f_left = f.copy()
    for loc, mass in atoms:
        f_left = np.where(values == loc, f_left - mass, f_left)
    upper = np.abs(last / n - f)
    lower = np.abs(first / n - f_left)
    return float(max(upper.max(), lower.max()))


def variance_slope(sizes, variances) -> float:
    """Least-squares slope of ``log(variance)`` against ``log(2n)``."""
    sizes = np.asarray(sizes, dtype=np.float64)
    variances = np.asarray(variances, dtype=np.float64)
    if sizes.size < 3 or sizes.size != variances.size:
        raise SampleSizeError("need at least 3 (size, variance) pairs")
    if np.any(variances <= 0) or np.any(sizes <= 0):
        raise DomainError("variances and sizes must be positive")
    slope, _ = np.polyfit(np.log(sizes), np.log(variances), 1)
    return float(slope)
