"""Command-line interface.

Every output stream starts with its run manifest (a JSON line, or a ``#``
comment line in CSV mode). Exit codes: 0 verified, 1 a checked property
failed, 2 invalid input, 3 an enumeration cap was hit.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from cayley_ising import __version__, tree
from cayley_ising.configurations import (
    BoundarySpec,
    conditional_hamiltonian,
    dump_config,
    generate,
    ground_state_audit,
    load_config,
    peierls_verify,
)
from cayley_ising.contours import (
    boundary_partition,
    contour_hamiltonian,
    contour_stats,
    contour_to_dict,
    count_contours_through,
    extract_contours,
)
from cayley_ising.errors import CayleyIsingError, ResourceError
from cayley_ising.gibbs import GibbsSpec, exact_gibbs, mcmc_sample, two_phase_report
from cayley_ising.kernels import BACKEND
from cayley_ising.model import (
    Couplings,
    PeriodicCouplings,
    energy_table,
    in_peierls_region,
    is_periodic,
    lambda0,
    minimal_classes,
    region_labels,
    to_fraction,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3
MAX_GRID = 10**6


def fmt(x):
    """Exact rationals print exactly; floats with 12 significant digits."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return format(x, ".12g")
    return x


def _rational(text):
    try:
        return to_fraction(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid(text):
    """``value``, ``v1,v2,...`` or ``start:stop:count`` with exact rational endpoints."""
    if "," in text:
        try:
            return [to_fraction(t) for t in text.split(",")]
        except (ValueError, TypeError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [to_fraction(parts[0])]
        if len(parts) == 3:
            lo, hi, count = to_fraction(parts[0]), to_fraction(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError("grid count must be positive")
            if count == 1:
                return [lo]
            return [lo + (hi - lo) * i / (count - 1) for i in range(count)]
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    raise argparse.ArgumentTypeError(f"grid must be VALUE or START:STOP:COUNT, got {text!r}")


def _subset(text):
    try:
        return frozenset(int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed generator set {text!r}") from None


def _spin(text):
    if text in ("1", "+1", "+", "plus"):
        return 1
    if text in ("-1", "-", "minus"):
        return -1
    raise argparse.ArgumentTypeError(f"spin must be +1 or -1, got {text!r}")


def _add_couplings(p, required=True):
    p.add_argument("--j1", type=_rational, required=required)
    p.add_argument("--j2", type=_rational, required=required)
    p.add_argument("--alpha", type=_rational)
    p.add_argument("--alpha0", type=_rational)
    p.add_argument("--alpha1", type=_rational)


def _couplings(args, allow_periodic=True):
    if args.alpha0 is not None or args.alpha1 is not None:
        if not allow_periodic:
            raise CayleyIsingError("this command takes the constant-field model (--alpha)")
        if args.alpha0 is None or args.alpha1 is None or args.alpha is not None:
            raise CayleyIsingError("give --alpha, or both --alpha0 and --alpha1")
        return PeriodicCouplings(args.j1, args.j2, args.alpha0, args.alpha1)
    if args.alpha is None:
        raise CayleyIsingError("missing --alpha (or --alpha0/--alpha1)")
    return Couplings(args.j1, args.j2, args.alpha)


def _labels(classes):
    return " ".join(c.label() for c in sorted(classes, key=lambda c: (c.j or 0, c.i, -c.epsilon)))


class Output:
    """Single-writer stream that starts with the run manifest."""

    def __init__(self, args, command, params, csv_mode=False):
        self.stream = open(args.out, "w", newline="") if getattr(args, "out", None) else sys.stdout
        self.csv_mode = csv_mode
        self.writer = None
        manifest = {
            "command": command,
            "params": {key: fmt(v) if not isinstance(v, (list, tuple)) else [fmt(x) for x in v]
                       for key, v in params.items()},
            "format": "csv" if csv_mode else "jsonl",
            "version": __version__,
        }
        if csv_mode:
            self.stream.write("# manifest " + json.dumps(manifest) + "\n")
        else:
            self.record({"manifest": manifest})

    def record(self, obj):
        self.stream.write(json.dumps(obj) + "\n")

    def row(self, header, values):
        if self.writer is None:
            self.writer = csv.writer(self.stream, lineterminator="\n")
            self.writer.writerow(header)
        self.writer.writerow([fmt(v) for v in values])

    def close(self):
        if self.stream is not sys.stdout:
            self.stream.close()
        else:
            self.stream.flush()


def _coupling_params(J):
    return {key: Fraction(v) for key, v in J.as_strings().items()}


def cmd_utable(args):
    J = _couplings(args)
    table = energy_table(J, args.k)
    mins = minimal_classes(J, args.k)
    out = Output(args, "utable", {"k": args.k, **_coupling_params(J)})
    for cls, u in table.items():
        out.record({"class": cls.label(), "energy": fmt(u), "minimal": cls in mins})
    summary = {
        "minimal_classes": _labels(mins),
        "lambda0": fmt(lambda0(J, args.k)),
    }
    if not is_periodic(J) or args.k == 2:
        summary["regions"] = [_labels([lab.ball_class]) for lab in region_labels(J, args.k)]
    if not is_periodic(J) and args.k == 2:
        summary["peierls_region"] = in_peierls_region(J)
    out.record(summary)
    out.close()
    return EXIT_OK


def cmd_scan(args):
    periodic = args.alpha0 is not None or args.alpha1 is not None
    axes = [args.j1, args.j2] + ([args.alpha0, args.alpha1] if periodic else [args.alpha])
    if any(a is None for a in axes):
        raise CayleyIsingError("scan needs --j1, --j2 and --alpha (or --alpha0 and --alpha1)")
    size = 1
    for a in axes:
        size *= len(a)
    if size > MAX_GRID:
        raise CayleyIsingError(f"grid of {size} points exceeds the limit {MAX_GRID}")
    params = {"k": args.k, "j1": args.j1, "j2": args.j2}
    if periodic:
        params.update(alpha0=args.alpha0, alpha1=args.alpha1)
        header = ["j1", "j2", "alpha0", "alpha1", "minimal_classes", "lambda0"]
    else:
        params.update(alpha=args.alpha)
        header = ["j1", "j2", "alpha", "minimal_classes", "lambda0", "peierls_region"]
    out = Output(args, "scan", params, csv_mode=True)
    for j1 in args.j1:
        for j2 in args.j2:
            if periodic:
                for a0 in args.alpha0:
                    for a1 in args.alpha1:
                        J = PeriodicCouplings(j1, j2, a0, a1)
                        out.row(header, [j1, j2, a0, a1, _labels(minimal_classes(J, args.k)),
                                         lambda0(J, args.k)])
            else:
                for a in args.alpha:
                    J = Couplings(j1, j2, a)
                    flag = in_peierls_region(J) if args.k == 2 else ""
                    out.row(header, [j1, j2, a, _labels(minimal_classes(J, args.k)),
                                     lambda0(J, args.k), flag])
    out.close()
    return EXIT_OK


def cmd_generate(args):
    extra = {}
    if args.family == "constant":
        extra["s"] = args.s
    elif args.family == "alternating":
        extra["s_even"] = args.s
    elif args.family == "ha_periodic":
        extra.update(A=args.A, l0=args.l[0], l1=args.l[1])
    else:
        extra.update(A=args.A, l00=args.l[0], l01=args.l[1], l10=args.l[2], l11=args.l[3])
    if args.family in ("ha_periodic", "ha_weakly_periodic"):
        need = 2 if args.family == "ha_periodic" else 4
        if args.A is None or args.l is None or len(args.l) != need:
            raise CayleyIsingError(f"{args.family} needs --A and {need} values for --l")
    config = generate(args.family, args.k, args.n, **extra)
    text = dump_config(config) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _read_config(path):
    try:
        with open(path) as fh:
            return load_config(fh.read())
    except OSError as exc:
        raise CayleyIsingError(f"cannot read {path}: {exc}") from None


def cmd_audit(args):
    config = _read_config(args.config)
    J = _couplings(args)
    depth = args.depth
    if depth + 1 > config.n + 2 and config.boundary.kind == "explicit":
        raise CayleyIsingError(f"the file covers V_{config.n + 2}; use --depth <= {config.n + 1}")
    report = ground_state_audit(config, J, depth)
    out = Output(args, "audit", {"config": args.config, "depth": depth, **_coupling_params(J)})
    for c, cls, u, lo in report.offending_balls:
        out.record({"center": tree.vertex_to_str(c), "class": cls.label(),
                    "energy": fmt(u), "min_energy": fmt(lo)})
    witness = report.opposite_sign_witness()
    out.record({
        "is_ground": report.is_ground,
        "offending": len(report.offending_balls),
        "realized_classes": _labels(report.realized_classes),
        "min_energy": fmt(report.min_energy),
        "opposite_sign_witness": [c.label() for c in witness] if witness else None,
    })
    out.close()
    return EXIT_OK if report.is_ground else EXIT_VIOLATION


def cmd_contours(args):
    config = _read_config(args.config)
    gammas = extract_contours(config)
    part = boundary_partition(config)
    params = {"config": args.config}
    J = None
    if args.j1 is not None:
        J = _couplings(args, allow_periodic=False)
        params.update(_coupling_params(J))
    out = Output(args, "contours", params)
    for g in gammas:
        out.record(contour_to_dict(g, contour_stats(g, part, config.k)))
    summary = {
        "contours": len(gammas),
        "boundary_counts": {c.label(): n for c, n in part.counts.items()},
    }
    status = EXIT_OK
    if J is not None:
        h_balls = conditional_hamiltonian(config, J)
        h_contours = contour_hamiltonian(config, J)
        summary.update(conditional_hamiltonian=fmt(h_balls), contour_hamiltonian=fmt(h_contours),
                       identity_holds=h_balls == h_contours)
        if h_balls != h_contours:
            status = EXIT_VIOLATION
    out.record(summary)
    out.close()
    return status


def cmd_gibbs(args):
    J = _couplings(args)
    boundary = BoundarySpec(args.bc)
    params = {"k": args.k, "n": args.n, "beta": args.beta, "bc": args.bc, "cap": args.cap,
              **_coupling_params(J)}
    results = [exact_gibbs(GibbsSpec(args.k, args.n, J, float(beta), boundary), cap=args.cap,
                           workers=args.workers) for beta in args.beta]
    out = Output(args, "gibbs", params, csv_mode=args.csv)
    header = ["beta", "boundary", "log_partition", "root_marginal_plus"]
    for beta, res in zip(args.beta, results):
        values = [beta, args.bc, res.log_partition, res.root_marginal_plus]
        if args.csv:
            out.row(header, values)
        else:
            out.record({h: fmt(v) for h, v in zip(header, values)})
    out.close()
    return EXIT_OK


def cmd_twophase(args):
    J = Couplings(args.j1, args.j2, args.alpha)
    rows = two_phase_report(args.n, J, [float(b) for b in args.beta], k=args.k, cap=args.cap,
                            workers=args.workers)
    params = {"k": args.k, "n": args.n, "beta": args.beta, **_coupling_params(J)}
    out = Output(args, "twophase", params, csv_mode=args.csv)
    header = ["beta", "point", "j1", "j2", "alpha", "boundary", "log_partition",
              "root_marginal_plus", "symmetry_gap"]
    worst = 0.0
    for r in rows:
        c = r["couplings"]
        values = [r["beta"], r["point"], c["j1"], c["j2"], c["alpha"], r["boundary"],
                  r["log_partition"], r["root_marginal_plus"], r["symmetry_gap"]]
        worst = max(worst, r["symmetry_gap"])
        if args.csv:
            out.row(header, values)
        else:
            out.record({h: fmt(v) for h, v in zip(header, values)})
    if not args.csv:
        out.record({"max_symmetry_gap": fmt(worst)})
    out.close()
    return EXIT_OK if worst <= 1e-12 else EXIT_VIOLATION


def cmd_mcmc(args):
    J = _couplings(args)
    spec = GibbsSpec(args.k, args.n, J, float(args.beta), BoundarySpec(args.bc))
    res = mcmc_sample(spec, args.sweeps, args.seed)
    params = {"k": args.k, "n": args.n, "beta": args.beta, "bc": args.bc,
              "sweeps": args.sweeps, "seed": args.seed, **_coupling_params(J)}
    out = Output(args, "mcmc", params)
    out.record({"root_marginal_plus": fmt(res.root_marginal_plus), "stderr": fmt(res.stderr),
                "burn_in": res.burn_in})
    out.close()
    return EXIT_OK


def cmd_peierls(args):
    J = Couplings(args.j1, args.j2, args.alpha)
    report = peierls_verify(J, args.radius, k=2)
    out = Output(args, "peierls", {"radius": args.radius, **_coupling_params(J)})
    ratio = report.min_ratio
    summary = f"{report.satisfied}/{report.total} satisfied"
    if ratio is not None:
        summary += f", min ratio {float(ratio)}"
    out.record({
        "summary": summary,
        "lambda0": fmt(report.lambda0),
        "total": report.total,
        "satisfied": report.satisfied,
        "violations": len(report.violations),
        "min_ratio": fmt(ratio) if ratio is not None else None,
        "argmin_minus_set": sorted((tree.vertex_to_str(x) for x in report.argmin),
                                   key=lambda s: (len(s), s)) if report.argmin else None,
    })
    out.close()
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_nr(args):
    x = tree.vertex_from_str(args.x, 2)
    res = count_contours_through(x, args.rmax, args.volume, cap=args.cap)
    out = Output(args, "nr", {"x": args.x, "rmax": args.rmax, "volume": args.volume})
    for r, count in res.counts.items():
        out.record({"r": r, "N_r": count, "bound": fmt(res.bound[r]),
                    "ok": count <= res.bound[r]})
    out.close()
    return EXIT_OK if res.ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cayley-ising", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("utable", help="class-energy table, minimal classes, lambda0")
    p.add_argument("--k", type=int, default=2)
    _add_couplings(p)
    p.set_defaults(func=cmd_utable)

    p = sub.add_parser("scan", help="CSV phase-diagram scan over a coupling grid")
    p.add_argument("--k", type=int, default=2)
    for name in ("j1", "j2", "alpha", "alpha0", "alpha1"):
        p.add_argument(f"--{name}", type=_grid)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("generate", help="write a configuration file for a family")
    p.add_argument("family", choices=["constant", "ha_periodic", "ha_weakly_periodic", "alternating"])
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--s", type=_spin, default=1, help="constant value or even-sublattice value")
    p.add_argument("--A", type=_subset)
    p.add_argument("--l", type=_spin, nargs="+", help="l0 l1, or l00 l01 l10 l11")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("audit", help="ground-state audit of a configuration file")
    p.add_argument("config")
    p.add_argument("--depth", type=int, default=3)
    _add_couplings(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("contours", help="contour listing of a +1-boundary configuration file")
    p.add_argument("config")
    _add_couplings(p, required=False)
    p.set_defaults(func=cmd_contours)

    p = sub.add_parser("gibbs", help="exact finite-volume Gibbs root marginal")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=_rational, nargs="+", required=True)
    p.add_argument("--bc", choices=["plus", "minus"], default="plus")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--cap", type=int, default=2**24)
    p.add_argument("--workers", type=int, default=1)
    _add_couplings(p)
    p.set_defaults(func=cmd_gibbs)

    p = sub.add_parser("twophase", help="root marginals under both boundary conditions")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=_rational, nargs="+", required=True)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--cap", type=int, default=2**24)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--j1", type=_rational, required=True)
    p.add_argument("--j2", type=_rational, required=True)
    p.add_argument("--alpha", type=_rational, required=True)
    p.set_defaults(func=cmd_twophase)

    p = sub.add_parser("mcmc", help="Metropolis estimate of the root marginal")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=_rational, required=True)
    p.add_argument("--bc", choices=["plus", "minus"], default="plus")
    p.add_argument("--sweeps", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=0)
    _add_couplings(p)
    p.set_defaults(func=cmd_mcmc)

    p = sub.add_parser("peierls", help="exhaustive Peierls-condition check (k = 2)")
    p.add_argument("--j1", type=_rational, required=True)
    p.add_argument("--j2", type=_rational, required=True)
    p.add_argument("--alpha", type=_rational, required=True)
    p.add_argument("--radius", type=int, default=2)
    p.set_defaults(func=cmd_peierls)

    p = sub.add_parser("nr", help="count contours through a vertex by size (k = 2)")
    p.add_argument("--x", default="", help="vertex string, root is ''")
    p.add_argument("--rmax", type=int, default=6)
    p.add_argument("--volume", type=int, default=2)
    p.add_argument("--cap", type=int, default=2**16)
    p.set_defaults(func=cmd_nr)

    for p in sub.choices.values():
        if p.prog.split()[-1] != "generate":
            p.add_argument("--out", help="write to this file instead of stdout")
        else:
            p.add_argument("--out")
    return parser


def _glue_negative_values(argv):
    # argparse reads "-2:2:5" as a flag; attach such values to their option
    out = []
    for tok in argv:
        if (out and out[-1].startswith("--") and "=" not in out[-1]
                and len(tok) > 1 and tok[0] == "-" and (tok[1].isdigit() or tok[1] == ".")):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    try:
        return args.func(args)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except CayleyIsingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
