"""Command-line entry point (``symgue`` / ``python -m symgue``).

Exit codes: 0 when every asserted criterion passes, 2 when the run is
inconclusive, 1 on failure or error.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from ..core import EnsembleSpec, SymgueError, SymmetryClass
from ..eig import eigh, eigh_structured
from ..laws import get_law, LAWS
from ..sampler import sample_matrix
from .config import DEFAULT_SEED, EXPERIMENTS, build_config, parse_assignments, parse_complex
from .experiments import run_experiment
from .report import dumps, emit, fmt_float


def _global_flags(p):
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="64-bit master seed")
    p.add_argument("--out", default=None, help="output directory (or file for sample/spectrum/law)")
    p.add_argument("--threads", type=int, default=None, help="worker threads")
    p.add_argument("--config", default=None, help="key=value configuration file")


def _experiment_flags(p):
    p.add_argument("--classes", default=None, help="comma list of classes")
    p.add_argument("--sizes", default=None, help="comma list of sides 2n")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--probes", default=None, help='comma list such as "2i,3i"')
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="any config key, including tol.<name>; repeatable")


class _Parser(argparse.ArgumentParser):
    # usage errors exit with 1; 2 is reserved for inconclusive runs
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="symgue", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw one matrix and print it as JSON")
    _global_flags(p)
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--n", type=int, required=True, help="half-size n (side 2n)")
    p.add_argument("--replicate", type=int, default=0)

    p = sub.add_parser("spectrum", help="eigenvalues of one sampled matrix")
    _global_flags(p)
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--replicate", type=int, default=0)
    p.add_argument("--method", choices=("structured", "lapack", "householder"),
                   default="structured")

    p = sub.add_parser("law", help="tabulate density, cdf and Stieltjes transform as CSV")
    _global_flags(p)
    p.add_argument("name", choices=sorted(LAWS))
    p.add_argument("--grid", default="-3:3:121", help="start:stop:count")
    p.add_argument("--eta", type=float, default=1e-3,
                   help="transform evaluated at lambda + i*eta")

    p = sub.add_parser("experiment", help="run a named experiment")
    p.add_argument("name", choices=EXPERIMENTS)
    _global_flags(p)
    _experiment_flags(p)

    p = sub.add_parser("verify", help="alias for 'experiment identities'")
    _global_flags(p)
    _experiment_flags(p)

    p = sub.add_parser("bench", help="alias for 'experiment bench'")
    _global_flags(p)
    _experiment_flags(p)
    return parser


def _write_text(text, out):
    if out:
        d = os.path.dirname(out)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _spec(args):
    seed = DEFAULT_SEED if args.seed is None else args.seed
    return EnsembleSpec(SymmetryClass.parse(args.cls), args.n, seed)


def cmd_sample(args):
    spec = _spec(args)
    w = sample_matrix(spec, args.replicate)
    doc = {"class": spec.symmetry.value, "n": spec.n, "seed": spec.master_seed,
           "replicate": args.replicate, "re": w.entries.real, "im": w.entries.imag}
    _write_text(dumps(doc) + "\n", args.out)
    return 0


def cmd_spectrum(args):
    spec = _spec(args)
    w = sample_matrix(spec, args.replicate)
    if args.method == "structured":
        lam = eigh_structured(w, spec.symmetry).eigenvalues
    else:
        lam = eigh(w, method=args.method).eigenvalues
    _write_text("eigenvalue\n" + "".join(fmt_float(x) + "\n" for x in lam), args.out)
    return 0


def cmd_law(args):
    law = get_law(args.name)
    try:
        start, stop, count = args.grid.split(":")
        lam = np.linspace(float(start), float(stop), int(count))
    except ValueError:
        raise SymgueError(f"bad grid {args.grid!r}; expected start:stop:count") from None
    dens = np.asarray(law.density(lam), dtype=float)
    cdf = np.asarray(law.cdf(lam), dtype=float)
    f = np.asarray(law.stieltjes(lam + 1j * args.eta))
    lines = ["lambda,density,cdf,re_stieltjes,im_stieltjes"]
    lines += [",".join(fmt_float(v) for v in row)
              for row in zip(lam, dens, cdf, f.real, f.imag)]
    _write_text("\n".join(lines) + "\n", args.out)
    return 0


def cmd_experiment(args, name):
    flags = parse_assignments(args.set)
    if args.classes is not None:
        flags.update(parse_assignments([f"classes={args.classes}"]))
    if args.sizes is not None:
        flags.update(parse_assignments([f"sizes={args.sizes}"]))
    if args.probes is not None:
        flags["probes"] = tuple(parse_complex(z) for z in args.probes.split(","))
    for key in ("replicates", "seed", "threads"):
        if getattr(args, key) is not None:
            flags[key] = getattr(args, key)
    if args.out is not None:
        flags["output_dir"] = args.out
    flags.pop("experiment", None)
    cfg = build_config(name, args.config, **flags)
    report = run_experiment(cfg)
    paths = emit(report, cfg.output_dir)
    for c in report.criteria:
        if c.asserted:
            state = {True: "PASS", False: "FAIL", None: "INCONCLUSIVE"}[c.passed]
            print(f"{state:12s} {c.name}")
    print(f"{report.experiment}: {report.status} ({len(paths)} files in {cfg.output_dir})")
    return report.exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sample":
            return cmd_sample(args)
        if args.command == "spectrum":
            return cmd_spectrum(args)
        if args.command == "law":
            return cmd_law(args)
        if args.command == "experiment":
            return cmd_experiment(args, args.name)
        if args.command == "verify":
            return cmd_experiment(args, "identities")
        if args.command == "bench":
            return cmd_experiment(args, "bench")
    except (SymgueError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
