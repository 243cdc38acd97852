"""``dirac-lab`` command line front end.

Exit codes: 0 pass, 1 contract or axiom failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import documents as docs
from .dirac import (
    DiracAxiomError,
    DiracPair,
    NonCommutingError,
    NotStandardPositionError,
    assemble_dirac,
    axiom_check,
    coboundary,
    max_norm,
    reconstruct_tuple,
)
from .graded import (
    NotCoveredError,
    defect_rank,
    dshift_quotient_spec,
    euler_characteristic_example,
    free_module_spec,
    parse_polynomial,
    stabilized_index,
)
from .spectral import (
    DEFAULT_RANK_TOL,
    DEFAULT_SEED,
    TriangularizationError,
    betti_numbers,
    clifford_scan,
    fredholm_report,
    solve_linear,
    taylor_spectrum,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, complex) or np.iscomplexobj(x):
        z = complex(x)
        return f"{z.real:.15g}{z.imag:+.15g}i"
    return f"{float(x):.15g}"


def fmt_vec(v) -> str:
    return "(" + ", ".join(fmt(complex(z)) for z in v) + ")"


def _complex_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _write_json(args, payload):
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(docs.dumps(payload))


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("DIRACLAB_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"DIRACLAB_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _load_tuple(path):
    doc = docs.load_document(path)
    if isinstance(doc, DiracPair):
        raise docs.DocumentError("this command needs a tuple document, got a Dirac document")
    return doc


def cmd_verify(args) -> int:
    doc = docs.load_document(args.input)
    if isinstance(doc, DiracPair):
        pair = doc
        rep = axiom_check(pair)
        _print_axioms(rep)
        payload = {"kind": "dirac", "axioms": _axiom_dict(rep), "passed": rep.passed}
        ok = rep.passed
        if ok:
            try:
                t = reconstruct_tuple(pair)
            except (NotStandardPositionError, NonCommutingError) as exc:
                print(f"reconstruction: FAIL ({exc})")
                ok = False
            else:
                print("reconstruction: ok")
                for k, T in enumerate(t.matrices, 1):
                    print(f"T_{k} = {_fmt_matrix(T)}")
                payload["tuple"] = docs.tuple_to_dict(t)
        payload["passed"] = ok
    else:
        t = doc
        pair = assemble_dirac(t)
        rep = axiom_check(pair)
        B = coboundary(t)
        b2 = max_norm(B @ B)
        lap = max_norm(pair.D @ pair.D - B.conj().T @ B - B @ B.conj().T)
        _print_axioms(rep)
        print(f"B^2 residual: {fmt(b2)}")
        print(f"D^2 - (B*B + BB*) residual: {fmt(lap)}")
        ok = rep.passed and b2 < rep.tol and lap < rep.tol
        payload = {"kind": "tuple", "axioms": _axiom_dict(rep), "B2": b2, "laplacian": lap,
                   "passed": ok}
    print("PASS" if ok else "FAIL")
    _write_json(args, payload)
    return EXIT_OK if ok else EXIT_FAIL


def _axiom_dict(rep):
    return {"D1": rep.d1, "D2": rep.d2, "D3": rep.d3, "self_adjoint": rep.self_adjoint,
            "tol": rep.tol}


def _print_axioms(rep):
    for name, val in _axiom_dict(rep).items():
        print(f"{name}: {fmt(val)}")


def _fmt_matrix(T) -> str:
    return "[" + "; ".join(" ".join(fmt(complex(z)) for z in row) for row in T) + "]"


def cmd_reconstruct(args) -> int:
    doc = docs.load_document(args.input)
    if not isinstance(doc, DiracPair):
        raise docs.DocumentError("reconstruct needs a Dirac document")
    try:
        t = reconstruct_tuple(doc)
    except (DiracAxiomError, NotStandardPositionError) as exc:
        print(f"FAIL: {exc} (residual {fmt(exc.residual)})")
        return EXIT_FAIL
    for k, T in enumerate(t.matrices, 1):
        print(f"T_{k} = {_fmt_matrix(T)}")
    text = docs.dumps(docs.tuple_to_dict(t))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    _write_json(args, docs.tuple_to_dict(t))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    t = _load_tuple(args.input)
    rep = taylor_spectrum(t, rank_tol=args.rank_tol, seed=_seed(args))
    print(f"candidates: {len(rep.candidates)}  verified: {len(rep.verified)}  tol: {fmt(rep.tol)}")
    for lam, s in zip(rep.candidates, rep.min_singular):
        mark = "*" if any(lam is v for v in rep.verified) else " "
        print(f"{mark} {fmt_vec(lam)}  sigma_min {fmt(s)}")
    if rep.grid_min is not None:
        print(f"grid minimum of sigma_min: {fmt(rep.grid_min)}")
    _write_json(args, {
        "candidates": [[_complex_pair(z) for z in lam] for lam in rep.candidates],
        "verified": [[_complex_pair(z) for z in lam] for lam in rep.verified],
        "min_singular": list(map(float, rep.min_singular)),
        "tol": rep.tol,
        "grid_min": rep.grid_min,
    })
    return EXIT_OK


def cmd_index(args) -> int:
    t = _load_tuple(args.input)
    rep = fredholm_report(t, rank_tol=args.rank_tol)
    half = t.n << (t.d - 1)
    print(f"dim ker D_+ = {rep.dim_ker_plus}")
    print(f"dim ker D_+^* = {rep.dim_ker_minus}")
    print(f"index = {rep.index}")
    print(f"finite-dimensional H: dim H_+ = dim H_- = n*2^(d-1) = {half}, so the index is 0")
    _write_json(args, {"dim_ker_plus": rep.dim_ker_plus, "dim_ker_minus": rep.dim_ker_minus,
                       "index": rep.index})
    return EXIT_OK if rep.index == 0 else EXIT_FAIL


def cmd_betti(args) -> int:
    t = _load_tuple(args.input)
    bv = betti_numbers(t, rank_tol=args.rank_tol)
    print("beta: " + " ".join(map(str, bv.betti)))
    print("harmonic: " + " ".join(map(str, bv.harmonic)))
    print(f"euler number: {bv.euler}")
    if bv.unstable:
        print("warning: rank decision within 10x of the tolerance")
    ok = bv.betti == bv.harmonic and bv.euler == 0
    _write_json(args, {"betti": list(bv.betti), "harmonic": list(bv.harmonic),
                       "euler": bv.euler, "unstable": bv.unstable})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_solve(args) -> int:
    t = _load_tuple(args.input)
    try:
        with open(args.rhs) as fh:
            y = docs.decode_vector(json.load(fh))
    except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        raise docs.DocumentError(f"cannot read right-hand side {args.rhs}: {exc}") from None
    if y.shape != (t.n,):
        raise docs.DocumentError(f"right-hand side must have length {t.n}")
    res = solve_linear(t, y, rank_tol=args.rank_tol)
    print(f"solvable: {'yes' if res.solvable else 'no'}")
    for k, xk in enumerate(res.x, 1):
        print(f"x_{k} = {fmt_vec(xk)}")
    print(f"residual: {fmt(res.residual)}")
    print(f"tautological perturbation dim: {res.perturbation_dim}")
    print(f"exact at 1-forms: {'yes' if res.exact_at_omega1 else 'no'}")
    _write_json(args, {
        "solvable": res.solvable,
        "x": [[_complex_pair(z) for z in xk] for xk in res.x],
        "residual": res.residual,
        "perturbation_dim": res.perturbation_dim,
        "kernel_dim": res.kernel_dim,
        "exact_at_omega1": res.exact_at_omega1,
    })
    return EXIT_OK


def _parse_axis(text):
    try:
        lo, hi, steps = text.split(":")
        return float(lo), float(hi), int(steps)
    except ValueError:
        raise UsageError(f"bad --grid axis {text!r}; expected MIN:MAX:STEPS") from None


def cmd_scan(args) -> int:
    doc = docs.load_document(args.input)
    pair = doc if isinstance(doc, DiracPair) else assemble_dirac(doc)
    if args.points:
        try:
            with open(args.points) as fh:
                pts = [docs.decode_vector(p) for p in json.load(fh)]
        except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
            raise docs.DocumentError(f"cannot read points {args.points}: {exc}") from None
        if any(p.shape != (pair.d,) for p in pts):
            raise docs.DocumentError(f"every point must have {pair.d} coordinates")
        res = clifford_scan(pair, points=np.array(pts).reshape(-1, pair.d), workers=args.workers)
    else:
        if pair.d > 2:
            raise UsageError("full grids need d <= 2; pass --points for larger d")
        if not args.grid:
            raise UsageError("give --grid axes or --points")
        grid = [_parse_axis(g) for g in args.grid]
        if len(grid) != 2 * pair.d:
            raise UsageError(f"need {2 * pair.d} --grid axes (re/im per coordinate)")
        try:
            res = clifford_scan(pair, grid=grid, workers=args.workers)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    text = res.to_tsv()
    with open(args.out, "w", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {len(res.sigma_min)} rows to {args.out}")
    print("eigenvalues of D: " + " ".join(fmt(e) for e in res.dirac_eigenvalues))
    return EXIT_OK


def cmd_graded(args) -> int:
    try:
        if args.kind == "free":
            spec = free_module_spec(args.d, args.rank, args.max_degree, gram=args.gram)
            chi = args.rank
        else:
            phis = [parse_polynomial(p, args.d) for p in args.phi]
            if args.r is not None and args.r != len(phis):
                raise UsageError(f"--r {args.r} does not match {len(phis)} --phi values")
            spec = dshift_quotient_spec(args.d, len(phis), phis, args.max_degree)
            if args.gram == "identity":
                spec = spec.with_identity_gram()
            chi = None
    except NotCoveredError as exc:
        print(f"rejected: {exc}")
        return EXIT_FAIL
    except ValueError as exc:
        raise docs.DocumentError(str(exc)) from None

    rep = stabilized_index(spec, rank_tol=args.rank_tol)
    table = rep.table
    print(f"trusted degrees 0..{table.trusted_max_degree}")
    print("beta (k, j): value, nonzero trusted entries")
    for (k, j), v in sorted(table.trusted().items()):
        if v:
            print(f"  ({k}, {j}): {v}")
    print(f"stabilized: {'yes' if rep.stabilized else 'no (result untrusted)'}")
    print(f"index: {rep.index}")
    print(f"curvature K = (-1)^d * index = {rep.curvature}")
    usable = [j for j in range(spec.max_degree - 1)]
    drank = defect_rank(spec, usable, rank_tol=args.rank_tol)
    print(f"defect rank: {drank}")
    if args.kind == "shift-quotient":
        try:
            chi = euler_characteristic_example(args.d, len(args.phi), "homogeneous",
                                               phis=[parse_polynomial(p, args.d) for p in args.phi],
                                               max_degree=args.max_degree)
        except RuntimeError as exc:
            print(f"chi cross-check failed: {exc}")
            chi = None
    if chi is not None:
        print(f"euler characteristic chi: {chi}")
    payload = json.loads(table.to_json())
    payload.update({"index": rep.index, "curvature": rep.curvature, "defect_rank": drank,
                    "chi": chi})
    _write_json(args, payload)
    return EXIT_OK if rep.stabilized else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL,
                        help="relative rank tolerance (default %(default)g)")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for randomized steps (fallback: $DIRACLAB_SEED)")
    common.add_argument("--json", metavar="PATH", default=None, help="also write a JSON report")

    p = argparse.ArgumentParser(prog="dirac-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, helptext in [
        ("verify", cmd_verify, "check Dirac axioms for a tuple or Dirac document"),
        ("reconstruct", cmd_reconstruct, "recover the tuple from a Dirac document"),
        ("spectrum", cmd_spectrum, "Taylor spectrum of a tuple"),
        ("index", cmd_index, "Fredholm index data"),
        ("betti", cmd_betti, "Koszul Betti numbers"),
    ]:
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("input")
        sp.set_defaults(func=fn)
        if name == "reconstruct":
            sp.add_argument("--out", help="write the recovered tuple document here")

    sp = sub.add_parser("solve", parents=[common], help="solve T_1 x_1 + ... + T_d x_d = y")
    sp.add_argument("input")
    sp.add_argument("--rhs", required=True, help="JSON list with the right-hand side y")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("scan", parents=[common], help="sigma_min(D - R(lambda)) table")
    sp.add_argument("input")
    sp.add_argument("--grid", action="append", metavar="MIN:MAX:STEPS",
                    help="one per real axis: re(l1), im(l1), re(l2), ...")
    sp.add_argument("--points", help="JSON list of lambda vectors")
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("graded", help="graded module cohomology and index")
    gsub = sp.add_subparsers(dest="kind", required=True)
    gp = gsub.add_parser("free", parents=[common])
    gp.add_argument("--d", type=int, required=True)
    gp.add_argument("--rank", type=int, default=1)
    gp.add_argument("--max-degree", type=int, required=True)
    gp.add_argument("--gram", choices=("fock", "identity"), default="fock")
    gp.set_defaults(func=cmd_graded)
    gp = gsub.add_parser("shift-quotient", parents=[common])
    gp.add_argument("--d", type=int, required=True)
    gp.add_argument("--r", type=int, default=None)
    gp.add_argument("--phi", action="append", required=True,
                    help='homogeneous multiplier, e.g. "1:(1,0)"; repeat for each')
    gp.add_argument("--max-degree", type=int, required=True)
    gp.add_argument("--gram", choices=("fock", "identity"), default="fock")
    gp.set_defaults(func=cmd_graded)
    return p


def _join_grid_values(argv):
    # axis specs such as "-1:1:21" would otherwise be taken for options
    out, it = [], iter(argv)
    for a in it:
        if a == "--grid":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--grid={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_grid_values(argv))
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dirac-lab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonCommutingError as exc:
        print(f"FAIL: {exc} (commutator norm {fmt(exc.commutator_norm)})")
        return EXIT_FAIL
    except docs.DocumentError as exc:
        print(f"dirac-lab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (TriangularizationError, DiracAxiomError, NotStandardPositionError) as exc:
        print(f"FAIL: {exc}")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
