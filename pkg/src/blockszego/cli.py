"""Command-line harness: ``blockszego {gen,run,experiment,verify,print-config}``.

Exit codes: 0 success, 2 deflation or breakdown, 3 invalid input,
4 numerical failure (including failed verification checks).
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from . import config as cfgmod
from .diagnostics import ExperimentResult, orthogonality_error, projection_error
from .errors import BlockSzegoError, DeflationError, InvalidInput, NumericalFailure
from .experiments import (
    accuracy_table,
    floquet_problem,
    gaussian_block,
    loglog_slope,
    ritz_experiment,
    run_algorithm,
    sweep,
    timing_table,
    verify_suite,
)
from .krylov import ALGORITHMS, format_counters, write_basis
from .operators import (
    IdentityOperator,
    floquet_unitary,
    gapped_spectrum,
    normal_with_spectrum,
    random_disk_points,
    random_floquet,
    read_matrix_market,
    read_sidecar,
    unitary_with_spectrum,
    write_matrix_market,
    write_sidecar,
)

EXIT_OK, EXIT_DEFLATION, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3, 4

log = logging.getLogger("blockszego")

RUN_COLUMNS = ["algorithm", "m", "time", "orth", "proj", "applications", "adjoint_applications",
               "inner_products", "deflated_at", "deflation_rank"]


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would read as "deflation".
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_matrix(sec):
    """Operator described by a ``[matrix]`` config section."""
    kind = sec.get("kind")
    n = sec.getint("n")
    seed = sec.getint("seed")
    if kind == "floquet":
        if sec.getboolean("zero_alphas"):
            return floquet_unitary(np.zeros(n)), {"kind": kind, "n": n, "zero_alphas": True}
        return random_floquet(n, seed), {"kind": kind, "n": n, "seed": seed, "alpha_distribution": "uniform-disk"}
    if kind == "unitary-spectrum":
        rep, gap = sec.getint("repeated"), sec.getfloat("gap")
        lam = gapped_spectrum(n, seed, repeated=rep, gap=gap)
        return unitary_with_spectrum(lam, seed), {"kind": kind, "n": n, "seed": seed, "repeated": rep, "gap": gap}
    if kind == "normal-spectrum":
        lam = random_disk_points(n, np.random.default_rng(seed))
        return normal_with_spectrum(lam, seed), {"kind": kind, "n": n, "seed": seed}
    if kind == "identity":
        return IdentityOperator(n), {"kind": kind, "n": n}
    if os.path.exists(kind):
        return read_matrix_market(kind), {"kind": "file", "path": kind}
    raise InvalidInput(f"unknown matrix kind {kind!r}")


def _apply_overrides(cfg, args):
    pairs = {
        ("matrix", "kind"): getattr(args, "kind", None),
        ("matrix", "n"): getattr(args, "n", None),
        ("matrix", "seed"): getattr(args, "seed", None),
        ("run", "s"): getattr(args, "s", None),
        ("run", "m"): getattr(args, "m", None),
        ("run", "algorithms"): getattr(args, "algorithms", None),
    }
    if getattr(args, "command", None) == "experiment":
        for key in ("n", "s", "ms", "seed", "repeats"):
            v = getattr(args, f"exp_{key}", None)
            if v is not None and key in cfg[args.name]:
                cfg[args.name][key] = str(v)
    if getattr(args, "matrix", None):
        pairs["matrix", "kind"] = args.matrix
    if getattr(args, "zero_alphas", False):
        pairs["matrix", "zero_alphas"] = "yes"
    if getattr(args, "dump_basis", False):
        pairs["run", "dump_basis"] = "yes"
    for (sec, key), v in pairs.items():
        if v is not None:
            cfg[sec][key] = str(v)


def cmd_gen(cfg, args):
    op, meta = build_matrix(cfg["matrix"])
    out = args.output or os.path.join(cfgmod.output_dir(cfg, args.output_dir), f"{meta['kind']}_n{op.dim}.mtx")
    write_matrix_market(out, op, comment=json.dumps(meta, sort_keys=True))
    write_sidecar(out + ".json", meta)
    # read back to confirm the stored matrix is what we meant to write
    back = read_matrix_market(out, verify_unitary=op.is_unitary)
    if op.is_unitary and not back.is_unitary:
        raise NumericalFailure(f"{out}: stored matrix is not unitary to tolerance")
    print(out)
    return EXIT_OK


def _load_for_run(cfg):
    kind = cfg["matrix"]["kind"]
    if os.path.exists(kind):
        op = read_matrix_market(kind)
        side = kind + ".json"
        meta = read_sidecar(side) if os.path.exists(side) else {}
        meta.update(path=kind)
        return op, meta
    return build_matrix(cfg["matrix"])


def cmd_run(cfg, args):
    A, meta = _load_for_run(cfg)
    s = cfg["run"].getint("s")
    ms = cfgmod.int_list(cfg["run"]["m"])
    algs = cfgmod.name_list(cfg["run"]["algorithms"])
    bad = [a for a in algs if a not in ALGORITHMS]
    if bad:
        raise InvalidInput(f"unknown algorithms {bad}; choose from {', '.join(ALGORITHMS)}")
    for m in ms:
        if A.dim < s * m:
            log.warning("n = %d < s*m = %d: the space must deflate", A.dim, s * m)
    seed = cfg["matrix"].getint("seed")
    B = gaussian_block(A.dim, s, seed)
    outdir = cfgmod.output_dir(cfg, args.output_dir)
    res = ExperimentResult(RUN_COLUMNS, meta=dict(meta, s=s, seed=seed, algorithms=" ".join(algs)))
    deflated = False
    kw = {"eps_defl": cfg["tolerances"].getfloat("eps_defl")}
    for m in ms:
        for name in algs:
            opts = {"tol": cfg["tolerances"].getfloat("rank_tol")} if name in ("arnoldi", "laurent_gs") else kw
            rec = run_algorithm(name, A, B, m, **opts)
            d = rec.deflation
            deflated |= d is not None
            proj = projection_error(A, rec.basis, rec.projected) if rec.projected is not None else float("nan")
            c = rec.counters
            res.add(algorithm=name, m=m, time=rec.time, orth=orthogonality_error(rec.basis), proj=proj,
                    applications=c.applications, adjoint_applications=c.adjoint_applications,
                    inner_products=c.inner_products,
                    deflated_at=d.step if d else "", deflation_rank=d.rank if d else "")
            if d is not None:
                log.warning("%s m=%d: %s", name, m, d)
            if cfg["run"].getboolean("dump_basis"):
                stem = os.path.join(outdir, f"basis_{name}_m{m}")
                write_basis(stem + ".bin", rec.basis)
                with open(stem + ".counters", "w") as fh:
                    fh.write(format_counters(c, algorithm=name, m=m, deflated=d is not None))
    path = os.path.join(outdir, "run.csv")
    res.to_csv(path)
    res.write_meta(path + ".meta")
    print(path)
    return EXIT_DEFLATION if deflated else EXIT_OK


def cmd_experiment(cfg, args):
    name = args.name
    outdir = cfgmod.output_dir(cfg, args.output_dir)
    if name == "ritz":
        sec = cfg["ritz"]
        res = ritz_experiment(n=sec.getint("n"), seed=sec.getint("seed"), ms=cfgmod.int_list(sec["ms"]),
                              block_sizes=cfgmod.int_list(sec["block_sizes"]),
                              weight=sec.getfloat("weight"), gap=sec.getfloat("gap"))
        path = os.path.join(outdir, "repeated_eigenvalue_ritz_distances_isometric_complex.csv")
    else:
        sec = cfg[name]
        n, s, seed = sec.getint("n"), sec.getint("s"), sec.getint("seed")
        ms = cfgmod.int_list(sec["ms"])
        A, B = floquet_problem(n, s, seed)
        if name == "timing":
            recs = sweep(A, B, ms, project=False, repeats=sec.getint("repeats"))
            res = timing_table(recs)
            for a in ALGORITHMS:
                log.info("slope %s = %.2f", a, loglog_slope(ms, res.column(f"time_{a}")))
        else:
            recs = sweep(A, B, ms)
            res = accuracy_table(A, recs)
        res.meta = {"experiment": name, "n": n, "s": s, "seed": seed, "matrix": "floquet"}
        path = os.path.join(outdir, f"{name}_floquet_n{n}_s{s}.csv")
        if any(r.deflation is not None for r in recs):
            res.to_csv(path)
            res.write_meta(path + ".meta")
            print(path)
            return EXIT_DEFLATION
    res.to_csv(path)
    res.write_meta(path + ".meta")
    print(path)
    return EXIT_OK


def cmd_verify(cfg, args):
    sec = cfg["verify"]
    checks = verify_suite(seed=sec.getint("seed"), n=sec.getint("n"), s=sec.getint("s"),
                          m=sec.getint("m"), instances=sec.getint("instances"),
                          corrupt_alpha=args.corrupt_alpha)
    for c in checks:
        print(c)
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_print_config(cfg, args):
    sys.stdout.write(cfgmod.dump(cfg))
    return EXIT_OK


def make_parser():
    p = _Parser(prog="blockszego", description="Short-recurrence block Krylov bases for unitary matrices.")
    p.add_argument("--config", help="INI file overriding the defaults (see print-config)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def matrix_args(q):
        q.add_argument("--kind", help="floquet | unitary-spectrum | normal-spectrum | identity")
        q.add_argument("--n", type=int)
        q.add_argument("--seed", type=int)
        q.add_argument("--zero-alphas", action="store_true", help="Floquet matrix with all alpha_j = 0")
        q.add_argument("--output-dir", help=f"overrides [output] dir and ${cfgmod.OUTPUT_ENV}")

    g = sub.add_parser("gen", help="write a test matrix in Matrix Market format")
    matrix_args(g)
    g.add_argument("-o", "--output", help="output .mtx path")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run algorithms and write diagnostics")
    matrix_args(r)
    r.add_argument("--matrix", help="Matrix Market file (instead of --kind)")
    r.add_argument("--s", type=int)
    r.add_argument("--m", help="step count(s), e.g. 30 or '10, 20'")
    r.add_argument("--algorithms", help=", ".join(ALGORITHMS))
    r.add_argument("--dump-basis", action="store_true")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("experiment", help="run one of the named experiments")
    e.add_argument("name", choices=["timing", "accuracy", "ritz"])
    e.add_argument("--output-dir")
    for key, typ in (("n", int), ("s", int), ("ms", str), ("seed", int), ("repeats", int)):
        e.add_argument(f"--{key}", dest=f"exp_{key}", type=typ, help=f"overrides [<name>] {key}")
    e.set_defaults(func=cmd_experiment)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--corrupt-alpha", action="store_true", help="inject a coefficient of norm > 1 (negative control)")
    v.set_defaults(func=cmd_verify)

    pc = sub.add_parser("print-config", help="print the effective configuration")
    pc.set_defaults(func=cmd_print_config)
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = cfgmod.load(args.config)
        _apply_overrides(cfg, args)
        return args.func(cfg, args)
    except DeflationError as exc:
        print(f"deflation: {exc}", file=sys.stderr)
        return EXIT_DEFLATION
    except (InvalidInput, ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalFailure, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BlockSzegoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
