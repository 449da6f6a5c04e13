"""Experiment configuration: flat ``key=value`` files plus command-line overrides.

Keys
----
experiment   one of ncm, variance, correlator, atom, adjudicate3, identities, laws, bench
classes      comma list of symmetry classes (Plain, Flip1, Central2, RowMirror3, Quarter4 or 0-4)
sizes        comma list of matrix sides 2n (even, >= 2)
replicates   replicates per (class, size); timing runs for ``bench``
probes       comma list of complex numbers written ``a+bi`` (``2i``, ``-1+3i``)
seed         64-bit master seed
output_dir   directory receiving the JSON report and CSV tables
threads      worker threads for replicate generation (default: all hardware threads)
tol.<name>   override one entry of :data:`DEFAULT_THRESHOLDS`

Lines starting with ``#`` are comments.  Keys missing from the file take the
per-experiment defaults in :data:`EXPERIMENT_DEFAULTS`.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

from ..core import ALL_CLASSES, InvalidSpecError, SymmetryClass

EXPERIMENTS = ("ncm", "variance", "correlator", "atom", "adjudicate3", "identities", "laws", "bench")

#: Every tolerance used by an experiment, by name.
DEFAULT_THRESHOLDS = {
    # exact identities (identities)
    "identity_residual": 1e-10,
    "negative_control_min": 1e-6,
    # law solver (laws)
    "root_residual": 1e-12,
    "conjugate_symmetry": 1e-14,
    "semicircle_mass": 1e-8,
    "case3_continuous_mass": 1e-6,
    "case3_atom": 1e-4,
    "density_extrapolation": 1e-5,
    "branch_jump": 1e-3,
    # weak convergence (ncm)
    "ks_max": 0.02,
    # zero eigenvalues and block equivalence (atom, adjudicate3)
    "zero_eigenvalue": 1e-8,
    "block_equivalence": 1e-8,
    # adjudication (adjudicate3)
    "adjudicate_stderr_max": 0.002,
    "adjudicate_sigmas": 3.0,
    "adjudicate_margin": 0.01,
    "edge_window": 0.05,
    # variance scaling (variance)
    "slope_min": -2.3,
    "slope_max": -1.7,
    "bound_1p2g": 0.5,
    "bound_1p2g_min_imag": 3.0,
    # correlators (correlator)
    "correlator_rel": 0.15,
    "ratio_target": 2.0,
    "ratio_tol": 0.2,
    "case3_rel_stderr": 0.10,
    # benchmark (bench)
    "speedup_rowmirror3": 3.0,
    "speedup_central2": 2.0,
    "bench_spectra": 1e-8,
}

_R3 = SymmetryClass.ROWMIRROR3
EXPERIMENT_DEFAULTS = {
    "ncm": dict(classes=ALL_CLASSES, sizes=(512,), replicates=200, probes=()),
    "variance": dict(classes=ALL_CLASSES, sizes=(64, 128, 256, 512), replicates=4000,
                     probes=(3j, 4j)),
    "correlator": dict(classes=ALL_CLASSES, sizes=(256,), replicates=20000, probes=(2j, 3j)),
    "atom": dict(classes=(_R3,), sizes=(512,), replicates=50, probes=()),
    "adjudicate3": dict(classes=(_R3,), sizes=(512,), replicates=2000, probes=(1j,)),
    "identities": dict(classes=ALL_CLASSES, sizes=(32,), replicates=50,
                       probes=(1 + 2j, 2j, -1 + 3j)),
    "laws": dict(classes=(), sizes=(), replicates=1, probes=()),
    "bench": dict(classes=(_R3, SymmetryClass.CENTRAL2), sizes=(1024,), replicates=5,
                  probes=()),
}

DEFAULT_SEED = 20060121


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` style numbers: ``2i``, ``-1+3i``, ``0.5``, ``i``."""
    t = str(text).strip().replace(" ", "").replace("I", "i").replace("j", "i")
    if not t:
        raise InvalidSpecError("empty complex literal")
    if t.endswith("i"):
        body = t[:-1]
        if body in ("", "+", "-") or body[-1] in "+-":
            t = body + "1i"
    try:
        return complex(t.replace("i", "j"))
    except ValueError:
        raise InvalidSpecError(f"cannot parse complex number {text!r}") from None


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if z.imag < 0 or (z.imag == 0 and str(z.imag).startswith("-")) else "+"
    return f"{float(z.real)!r}{sign}{abs(float(z.imag))!r}i"


def _split(text):
    return [t for t in (s.strip() for s in str(text).split(",")) if t]


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    classes: tuple
    sizes: tuple
    replicates: int
    probes: tuple
    seed: int = DEFAULT_SEED
    output_dir: str = "results"
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))

    def tol(self, name: str) -> float:
        return float(self.thresholds[name])

    def echo(self) -> dict:
        """Content-bearing fields; output location and thread count are not echoed."""
        return {
            "experiment": self.experiment,
            "classes": [c.value for c in self.classes],
            "sizes": list(self.sizes),
            "replicates": self.replicates,
            "probes": [format_complex(z) for z in self.probes],
            "seed": self.seed,
            "thresholds": dict(sorted(self.thresholds.items())),
        }


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise InvalidSpecError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    base = dict(EXPERIMENT_DEFAULTS[experiment])
    thresholds = dict(DEFAULT_THRESHOLDS)
    thresholds.update(overrides.pop("thresholds", {}) or {})
    base.update(overrides)
    cfg = ExperimentConfig(experiment=experiment, thresholds=thresholds, **base)
    cfg = replace(cfg, classes=tuple(SymmetryClass.parse(c) for c in cfg.classes),
                  sizes=tuple(int(s) for s in cfg.sizes),
                  probes=tuple(complex(z) for z in cfg.probes),
                  seed=int(cfg.seed) & 0xFFFFFFFFFFFFFFFF)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise InvalidSpecError(f"unknown experiment {cfg.experiment!r}")
    for s in cfg.sizes:
        if s < 2 or s % 2:
            raise InvalidSpecError(f"invalid-size: matrix side {s} must be even and >= 2")
    if cfg.replicates < 1:
        raise InvalidSpecError("replicates must be >= 1")
    for z in cfg.probes:
        if z.imag == 0:
            raise InvalidSpecError(f"probe {z} lies on the real axis")
    if cfg.threads < 1:
        raise InvalidSpecError("threads must be >= 1")
    unknown = set(cfg.thresholds) - set(DEFAULT_THRESHOLDS)
    if unknown:
        raise InvalidSpecError(f"unknown tolerances {sorted(unknown)}")


def parse_assignments(pairs) -> dict:
    """Turn ``key=value`` strings into config overrides."""
    out, thresholds = {}, {}
    for raw in pairs:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidSpecError(f"expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("tol."):
            thresholds[key[4:]] = float(value)
        elif key == "experiment":
            out[key] = value
        elif key == "classes":
            out[key] = tuple(SymmetryClass.parse(c) for c in _split(value))
        elif key == "sizes":
            out[key] = tuple(int(s) for s in _split(value))
        elif key == "probes":
            out[key] = tuple(parse_complex(z) for z in _split(value))
        elif key in ("replicates", "threads"):
            out[key] = int(value)
        elif key == "seed":
            out[key] = int(value, 0)
        elif key == "output_dir":
            out[key] = value
        else:
            raise InvalidSpecError(f"unknown config key {key!r}")
    if thresholds:
        out["thresholds"] = thresholds
    return out


def read_config_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_assignments(fh.read().splitlines())


def build_config(experiment=None, config_path=None, **flags) -> ExperimentConfig:
    """File values first, then non-None `flags` on top (flags win)."""
    values = read_config_file(config_path) if config_path else {}
    thresholds = dict(values.pop("thresholds", {}))
    thresholds.update(flags.pop("thresholds", None) or {})
    values.update({k: v for k, v in flags.items() if v is not None})
    name = experiment or values.pop("experiment", None)
    values.pop("experiment", None)
    if name is None:
        raise InvalidSpecError("no experiment given")
    if "output_dir" in values:
        values["output_dir"] = os.fspath(values["output_dir"])
    return default_config(name, thresholds=thresholds, **values)
