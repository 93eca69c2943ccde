"""Command line interface: ``cat2d verify | cut | majorize | fillrad | counterexample``.

Exit codes: 0 success or CONSISTENT, 2 VIOLATION (or a failed contract
check), 3 INCONCLUSIVE or budget exhausted, 64 bad input, 65 failed
precondition.  Reports are canonical JSON (sorted keys) and carry the tool
version, seed and tolerances so that a rerun with the same seed reproduces
them byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import BudgetExceeded, Cat2dError, InputError
from .scenes import Scene, builtin, dump_json, load_curve, load_scene

log = logging.getLogger("cat2d")

EXIT_OK, EXIT_VIOLATION, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 2, 3, 64
VERDICT_EXIT = {"CONSISTENT": EXIT_OK, "VIOLATION": EXIT_VIOLATION, "INCONCLUSIVE": EXIT_INCONCLUSIVE}


class _Parser(argparse.ArgumentParser):
    # argparse's own exit status 2 would collide with VIOLATION
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def resolve_seed(flag: int | None, scene: Scene | None = None) -> int:
    """--seed wins, then CAT2D_SEED, then the scene's own seed, then 0."""
    if flag is not None:
        return int(flag)
    env = os.environ.get("CAT2D_SEED")
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise InputError(f"CAT2D_SEED must be an integer, got {env!r}") from None
    return int(scene.seed) if scene is not None else 0


def _out(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write(path: Path, text: str):
    path.write_text(text)
    log.info("wrote %s", path)


def _curve(args, scene: Scene):
    return scene.jordan_curve(load_curve(args.curve) if args.curve else None)


# -- verify ---------------------------------------------------------------------------------

def run_verify(scene: Scene, out: Path, seed: int, samples: int, trials: int, tol: float,
               h: float | None = None, kappa: float | None = None, svg: bool = True) -> dict:
    from .verifier import verify_theorem_1_1, witnesses_csv

    k = scene.kappa if kappa is None else kappa
    rep = verify_theorem_1_1(scene.payload, k, samples=samples, trials=trials, tol=tol, seed=seed, h=h)
    rep["scene"] = {"name": scene.name, "kind": scene.kind}
    rep["budget"] = {"samples": samples, "trials": trials}
    _write(out / "report.json", dump_json(rep))
    _write(out / "witnesses.csv", witnesses_csv(rep))
    if svg and scene.kind == "plane-domain":
        from .plotting import plot_domain

        wit = [w for w in rep["comparison"]["witnesses"] if w["reverified"]][:3]
        plot_domain(scene.payload, out / "verify.svg", f"{scene.name}: {rep['verdict']}", wit)
    return rep


def cmd_verify(args) -> int:
    scene = load_scene(args.scene)
    seed = resolve_seed(args.seed, scene)
    rep = run_verify(scene, _out(args), seed, args.samples, args.trials, args.tol, args.h, args.kappa)
    c = rep["comparison"]
    print(f"{scene.name}: {rep['verdict']} ({c['evaluated']} triples, {c['violations']} violations, "
          f"max margin {c['max_margin']:.3g})")
    return VERDICT_EXIT[rep["verdict"]]


def cmd_counterexample(args) -> int:
    names = ["annulus", "cap"] if args.which == "all" else [args.which]
    seed = resolve_seed(args.seed)
    code = EXIT_VIOLATION
    for name in names:
        scene = builtin(name)
        out = _out(args) / name
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "scene.json", dump_json(scene.to_json()))
        rep = run_verify(scene, out, seed, args.samples, args.trials, args.tol)
        w = next((w for w in rep["comparison"]["witnesses"] if w["reverified"]), None)
        print(f"{name}: {rep['verdict']}" + (f", witness margin {w['recheck_margin']:.4g}" if w else ""))
        if rep["verdict"] != "VIOLATION":
            code = EXIT_INCONCLUSIVE
    return code


# -- cut ------------------------------------------------------------------------------------

def cmd_cut(args) -> int:
    from .jordan import iterated_cut

    scene = load_scene(args.scene)
    curve = _curve(args, scene)
    eps = args.epsilon if args.epsilon is not None else 0.25 * curve.diameter
    out = _out(args)
    code = EXIT_OK
    try:
        tree = iterated_cut(curve, eps, leaf_budget=args.leaf_budget, n_b=args.n_b, n_dir=args.n_dir,
                            delta=args.delta, jobs=args.jobs)
    except BudgetExceeded as exc:
        tree, code = exc.partial, EXIT_INCONCLUSIVE
        print(f"budget exhausted: {exc}", file=sys.stderr)
    doc = tree.to_json()
    doc.update({"tool": "cat2d", "version": __version__, "scene": scene.name,
                "leaf_budget": args.leaf_budget, "leaves": len(tree.leaves())})
    _write(out / "tree.json", dump_json(doc))
    if scene.kind == "plane-domain":
        from .plotting import plot_tree

        plot_tree(tree, out / "tree.svg")
    worst = max(n.curve.diameter for n in tree.leaves())
    print(f"{len(tree.leaves())} leaves, max leaf diameter {worst:.6g}, eps {eps:.6g}"
          + (" (partial)" if tree.partial else ""))
    return code


# -- majorize -------------------------------------------------------------------------------

def cmd_majorize(args) -> int:
    from .jordan import iterated_cut
    from .majorizer import assemble_limit_majorization, containment_report, lipschitz_report, tree_segments

    scene = load_scene(args.scene)
    seed = resolve_seed(args.seed, scene)
    curve = _curve(args, scene)
    eps = args.epsilon if args.epsilon is not None else 0.25 * curve.diameter
    tree = iterated_cut(curve, eps, leaf_budget=args.leaf_budget, jobs=args.jobs)
    Z = assemble_limit_majorization(tree, seed=seed)
    check = Z.check()
    cont = containment_report(Z, tree_segments(tree), eps, seed=seed)
    lip = lipschitz_report(Z, args.pairs, args.h, seed=seed)
    ok = bool(cont["passed"] and lip["passed"] and check["length_error"] <= 1e-9 and check["disc"])
    doc = {"tool": "cat2d", "version": __version__, "seed": seed, "scene": scene.name, "epsilon": eps,
           "majorization": Z.to_json(), "checks": check, "containment": cont, "lipschitz": lip,
           "passed": ok}
    out = _out(args)
    _write(out / "majdisc.json", dump_json(doc))
    if scene.kind == "plane-domain":
        from .plotting import plot_majdisc

        plot_majdisc(Z, out / "majdisc.svg")
    print(f"{len(Z.disc.triangles)} triangles, Lipschitz ratio {lip['max_ratio']:.12g}, "
          f"containment {cont['worst']:.4g} <= {eps:.4g}: {'ok' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_VIOLATION


# -- fillrad --------------------------------------------------------------------------------

FILLRAD_FIELDS = ["source", "n", "mesh", "death_scale", "fillrad", "delta", "length", "degenerate",
                  "longest_cut", "degeneracy_margin", "density_margin", "fillrad_margin", "passed"]


def cmd_fillrad(args) -> int:
    from .fillrad import FiniteMetric, boundary_metric, cycle_death, degeneracy_audit, fundamental_cycle

    row = dict.fromkeys(FILLRAD_FIELDS, "")
    code = EXIT_OK
    if args.matrix:
        try:
            text = Path(args.matrix).read_text()
        except (OSError, UnicodeDecodeError) as exc:
            raise InputError(f"{args.matrix}: {exc}") from None
        m = FiniteMetric.from_csv(text)
        row["source"] = Path(args.matrix).name
        mesh = float(max(m.d[i, (i + 1) % m.n] for i in range(m.n))) if m.n else 0.0
    else:
        if not args.scene:
            raise InputError("fillrad needs --matrix or a scene")
        scene = load_scene(args.scene)
        curve = _curve(args, scene)
        m, _, mesh = boundary_metric(curve, args.samples, intrinsic=not args.ambient)
        row["source"] = scene.name
        if args.audit is not None:
            a = degeneracy_audit(curve, args.audit, n_fill=args.samples)
            row.update({k: a.to_json()[k] for k in ("delta", "length", "degenerate", "longest_cut",
                                                   "degeneracy_margin", "density_margin",
                                                   "fillrad_margin", "passed")})
            code = EXIT_OK if a.passed else EXIT_VIOLATION
    if m.n < 3:
        raise InputError("a circle sample needs at least 3 points")
    cert = cycle_death(m, fundamental_cycle(m.n))
    row.update({"n": m.n, "mesh": mesh, "death_scale": cert.scale, "fillrad": cert.scale / 2})
    buf = io.StringIO()
    w = csv.DictWriter(buf, FILLRAD_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    _write(_out(args) / "fillrad.csv", buf.getvalue())
    sys.stdout.write(buf.getvalue())
    return code


# -- parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cat2d", description="CAT(k) tests, cuts and majorizations for planar Jordan curves.")
    p.add_argument("--version", action="version", version=f"cat2d {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (default: current directory)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $CAT2D_SEED, else scene seed, else 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads (default: 1)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def budget(q):
        q.add_argument("--samples", type=int, default=200, help="sample points (default: 200)")
        q.add_argument("--trials", type=int, default=10_000, help="comparison triples (default: 10000)")
        q.add_argument("--tol", type=float, default=1e-9, help="comparison tolerance (default: 1e-9)")

    q = sub.add_parser("verify", parents=[common], help="run the CAT(k) checker on a scene")
    q.add_argument("scene")
    budget(q)
    q.add_argument("--h", type=float, default=None, help="Steiner spacing for complexes (default: median edge / 4)")
    q.add_argument("--kappa", type=float, default=None, help="curvature bound (default: scene kappa)")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("counterexample", parents=[common], help="verify the built-in counterexamples")
    q.add_argument("which", nargs="?", default="all", choices=["all", "annulus", "cap"])
    budget(q)
    q.set_defaults(func=cmd_counterexample)

    def curve_args(q):
        q.add_argument("scene")
        q.add_argument("--curve", default=None, help="curve JSON (default: scene curve or outer ring)")
        q.add_argument("--epsilon", type=float, default=None, help="target leaf diameter (default: diameter / 4)")
        q.add_argument("--leaf-budget", type=int, default=2 ** 14, help="maximum leaves (default: 16384)")

    q = sub.add_parser("cut", parents=[common], help="iterated essential cuts of a Jordan curve")
    curve_args(q)
    q.add_argument("--n-b", type=int, default=None, help="boundary samples per curve (default: from epsilon)")
    q.add_argument("--n-dir", type=int, default=180, help="ray directions (default: 180)")
    q.add_argument("--delta", type=float, default=None, help="essentiality factor (default: eps / (1000 pi))")
    q.set_defaults(func=cmd_cut)

    q = sub.add_parser("majorize", parents=[common], help="assemble and check a majorizing disc")
    curve_args(q)
    q.add_argument("--pairs", type=int, default=10_000, help="Lipschitz sample pairs (default: 10000)")
    q.add_argument("--h", type=float, default=None, help="disc Steiner spacing (default: diameter / 64)")
    q.set_defaults(func=cmd_majorize)

    q = sub.add_parser("fillrad", parents=[common], help="filling radius of a circle sample")
    q.add_argument("scene", nargs="?", default=None)
    q.add_argument("--matrix", default=None, help="distance matrix CSV (n, then n rows)")
    q.add_argument("--curve", default=None)
    q.add_argument("--samples", type=int, default=256, help="boundary samples (default: 256)")
    q.add_argument("--ambient", action="store_true", help="use the ambient metric instead of the interior one")
    q.add_argument("--audit", type=float, default=None, metavar="DELTA", help="also run the degeneracy audit")
    q.set_defaults(func=cmd_fillrad)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.jobs < 1:
        print("cat2d: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except Cat2dError as exc:
        print(f"cat2d: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
