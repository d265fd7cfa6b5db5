"""``gll`` command line: JSON configs in, CSV/JSON out.

Exit status 0 on success, 2 on any validation or input error (one line on
stderr).  Outputs depend only on the arguments and ``--seed``.
"""

from __future__ import annotations

import argparse
import io
import itertools
import json
import os
import sys

import numpy as np

from . import fiber, gabor, lattice, mathieu, propagation, symplectic


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(out, header, rows, footer=()):
    out.write(",".join(header) + "\n")
    for r in rows:
        out.write(",".join(fmt(v) for v in r) + "\n")
    for line in footer:
        out.write(f"# {line}\n")


def write_json(out, obj):
    out.write(json.dumps(obj, sort_keys=True) + "\n")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _json_arg(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{what} is not valid JSON: {exc.msg}") from None


def _lattice_from(args) -> lattice.Lattice:
    if args.basis is not None:
        cols = np.asarray(_json_arg(args.basis, "--basis"), dtype=float)
        return lattice.Lattice(np.atleast_2d(cols).T)
    if args.lattice is not None:
        return lattice.Lattice.from_json(_read(args.lattice))
    raise ValueError("one of --basis or --lattice is required")


def _int_range(text: str) -> list[int]:
    """``a:b:s`` (inclusive) or a comma list."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise ValueError(f"bad range {text!r}")
        a, b = parts[:2]
        s = parts[2] if len(parts) == 3 else 1
        if s <= 0:
            raise ValueError("range step must be positive")
        return list(range(a, b + 1, s))
    return [int(p) for p in text.split(",") if p.strip()]


def _complex_list(values) -> np.ndarray:
    return np.array([complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in values])


def _positive(name, v):
    if not v > 0:
        raise ValueError(f"{name} must be positive")


# ------------------------------------------------------------ subcommands

def cmd_reduce_lattice(args, out):
    L = _lattice_from(args)
    if L.dim != 2:
        raise ValueError("reduce-lattice needs a 2-dimensional basis")
    if args.dry_run:
        return write_json(out, {"plan": "reduce 2D lattice to product form", "basis": L.basis.T.tolist()})
    sigma, alpha, beta = symplectic.reduce_to_product_d1(L)
    write_json(out, {"sigma": sigma.matrix.tolist(), "alpha": alpha, "beta": beta,
                     "covolume": lattice.covolume(L)})


def cmd_product_search(args, out):
    L = _lattice_from(args)
    if L.dim != 4:
        raise ValueError("product-search needs a 4-dimensional basis")
    _positive("--coeff-bound", args.coeff_bound)
    if args.dry_run:
        return write_json(out, {"plan": "bounded product-basis search", "coeff_bound": args.coeff_bound,
                                "candidates": (2 * args.coeff_bound + 1) ** 4 - 1})
    B = symplectic.product_basis_search(L, args.coeff_bound)
    write_json(out, {"found": B is not None, "coeff_bound": args.coeff_bound,
                     "basis": None if B is None else B.T.tolist()})


def _symbols(args) -> fiber.SymbolSet:
    return fiber.SymbolSet.from_json(_read(args.symbols))


def _points(text, d):
    pts = np.asarray(_json_arg(text, "point list"), dtype=float)
    return pts.reshape(-1, d)


def cmd_fiber_kernel(args, out):
    S = _symbols(args)
    Rs = _int_range(args.R)
    _positive("--tol", args.tol)
    if args.x is not None:
        xs = _points(args.x, S.d)
    else:
        rng = np.random.default_rng(args.seed)
        xs = S.period_lattice.embed(rng.random((args.samples, S.d)))
    if args.dry_run:
        return write_json(out, {"plan": "kernel sweep", "n_x": len(xs), "R": Rs})
    workers = args.threads
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            chunks = list(ex.map(lambda x: fiber.kernel_sweep(S, [x], Rs, args.tol), xs))
    else:
        chunks = [fiber.kernel_sweep(S, [x], Rs, args.tol) for x in xs]
    rows = [r for c in chunks for r in c]
    header = [f"x{i}" for i in range(S.d)] + ["R", "kernel_dim", "smin", "smax"]
    write_csv(out, header, rows)


def cmd_recurrence(args, out):
    S = _symbols(args)
    if S.d != 1:
        raise ValueError("recurrence needs a one-dimensional symbol set")
    window = _complex_list(_json_arg(args.window, "--window"))
    if args.dry_run:
        return write_json(out, {"plan": "propagate recurrence", "R": args.R, "window_len": len(window)})
    F = fiber.fiberize(S, [args.x])
    u = fiber.propagate_recurrence_d1(F, window, args.R, floor=args.floor)
    n = np.arange(-args.R, args.R + 1)
    write_csv(out, ["n", "re", "im"], [(int(k), v.real, v.imag) for k, v in zip(n, u)])


def cmd_conjugation_check(args, out):
    S = _symbols(args)
    if args.x is not None:
        xs = _points(args.x, S.d)
    else:
        rng = np.random.default_rng(args.seed)
        xs = S.period_lattice.embed(rng.random((args.samples, S.d)))
    if args.gamma0 is not None:
        g0s = np.asarray(_json_arg(args.gamma0, "--gamma0"), dtype=np.int64).reshape(-1, S.d)
    else:
        g0s = np.array(list(itertools.product((-1, 0, 1), repeat=S.d)), dtype=np.int64)
    if args.dry_run:
        return write_json(out, {"plan": "conjugation check", "n_x": len(xs), "n_gamma0": len(g0s), "R": args.R})
    box = fiber.Box.centered(args.R, S.d)
    dev = max(fiber.check_conjugation(S, x, g, box) for x in xs for g in g0s)
    write_json(out, {"max_deviation": dev, "n_x": len(xs), "n_gamma0": len(g0s), "R": args.R})


def _rule(args) -> propagation.PropagationRule:
    return propagation.PropagationRule.from_json(_read(args.rule))


def cmd_propagate(args, out):
    rule = _rule(args)
    C = [tuple(p) for p in _json_arg(args.set, "--set")]
    lo_hi = [int(v) for v in args.region.split(":")]
    if len(lo_hi) != 2:
        raise ValueError("--region takes lo:hi")
    lo, hi = (lo_hi[0],) * rule.d, (lo_hi[1],) * rule.d
    if args.dry_run:
        return write_json(out, {"plan": "propagate", "seed_size": len(C), "region": [lo_hi[0], lo_hi[1]]})
    P = propagation.propagate_set(rule, C, (lo, hi))
    write_json(out, {"size": len(P), "points": sorted(list(p) for p in P)})


def cmd_growth(args, out):
    rule = _rule(args)
    ns = _int_range(args.n)
    _positive("--margin", args.margin)
    if args.dry_run:
        return write_json(out, {"plan": "growth sweep", "n": ns, "margin": args.margin})
    res = propagation.growth_exponents(rule, ns, args.margin, workers=args.threads)
    rows = list(zip(res.n, res.card_C, res.card_P, res.clipped))
    write_csv(out, ["n", "card_C", "card_P", "clipped_flag"], rows,
              footer=[f"slope_C={fmt(res.slope_C)}", f"slope_P={fmt(res.slope_P)}"])


def _band_rows(p, q, bands):
    return [(p, q, i, lo, hi) for i, (lo, hi) in enumerate(bands)]


def cmd_mathieu_bands(args, out):
    _positive("--lambda", args.lam)
    _positive("--k", args.k)
    if args.dry_run:
        return write_json(out, {"plan": "bloch bands", "p": args.p, "q": args.q, "lambda": args.lam})
    if args.eigs is not None:
        params = mathieu.AMParams(args.lam, args.p / args.q, args.theta)
        rows = mathieu.eigen_sweep(params, [args.eigs])
        return write_csv(out, ["R", "index", "eigenvalue", "ipr", "residual"], rows)
    bands = mathieu.bloch_bands(args.lam, args.p, args.q, args.theta, args.k)
    write_csv(out, ["p", "q", "band_index", "lower", "upper"], _band_rows(args.p, args.q, bands))


def cmd_butterfly(args, out):
    _positive("--lambda", args.lam)
    _positive("--k", args.k)
    if args.q_max < 2:
        raise ValueError("--q-max must be at least 2")
    if args.dry_run:
        return write_json(out, {"plan": "butterfly", "q_max": args.q_max, "lambda": args.lam})
    data = mathieu.butterfly(args.lam, args.q_max, args.k, workers=args.threads)
    rows = [r for p, q, b in data for r in _band_rows(p, q, b)]
    write_csv(out, ["p", "q", "band_index", "lower", "upper"], rows)


def cmd_gram_cert(args, out):
    f = gabor.Window(args.window, args.width, args.degree)
    atoms = symplectic.atoms_from_json(_read(args.atoms))
    if any(a.d != 1 for a in atoms):
        f = gabor.Window(args.window, args.width, args.degree, d=atoms[0].d)
    if args.dry_run:
        return write_json(out, {"plan": "gram certificate", "window": f.kind, "matrix_size": len(atoms)})
    res = gabor.gram_matrix(f, atoms, workers=args.threads)
    write_json(out, {"min_eigenvalue": res.min_eigenvalue, "verdict": res.verdict, "matrix_size": len(atoms)})


# ------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    default_threads = int(os.environ.get("GLL_THREADS", "1") or 1)
    common = _Parser(add_help=False)
    common.add_argument("-o", "--output", help="output path (default: stdout)")
    common.add_argument("--dry-run", action="store_true", help="validate and print the plan only")
    common.add_argument("--threads", type=int, default=default_threads)
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="gll", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(func=func)
        return sp

    sp = add("reduce-lattice", cmd_reduce_lattice, "symplectic reduction of a 2D lattice to a product")
    sp.add_argument("--basis", help='JSON list of generators, e.g. "[[1,1],[0,1]]"')
    sp.add_argument("--lattice", help="lattice JSON file")

    sp = add("product-search", cmd_product_search, "bounded search for an isotropic-pair basis in R^4")
    sp.add_argument("--basis")
    sp.add_argument("--lattice")
    sp.add_argument("--coeff-bound", type=int, default=3)

    sp = add("fiber-kernel", cmd_fiber_kernel, "kernel dimensions of rectangular fiber truncations")
    sp.add_argument("--symbols", required=True)
    sp.add_argument("--R", default="10,50,200")
    sp.add_argument("--x", help="JSON list of base points")
    sp.add_argument("--samples", type=int, default=10)
    sp.add_argument("--tol", type=float, default=fiber.SVD_TOL)

    sp = add("recurrence", cmd_recurrence, "propagate a window through the 1D recurrence")
    sp.add_argument("--symbols", required=True)
    sp.add_argument("--x", type=float, default=0.0)
    sp.add_argument("--R", type=int, required=True)
    sp.add_argument("--window", required=True, help="JSON list; complex entries as [re, im]")
    sp.add_argument("--floor", type=float, default=1e-12)

    sp = add("conjugation-check", cmd_conjugation_check, "translation covariance of fiber truncations")
    sp.add_argument("--symbols", required=True)
    sp.add_argument("--x")
    sp.add_argument("--gamma0")
    sp.add_argument("--samples", type=int, default=10)
    sp.add_argument("--R", type=int, default=6)

    sp = add("propagate", cmd_propagate, "least fixpoint of the growth rule")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--set", required=True, help="JSON list of integer points")
    sp.add_argument("--region", required=True, help="lo:hi, applied to every coordinate (write --region=-5:5 for negative lo)")

    sp = add("growth", cmd_growth, "growth exponents of strip sets and their propagation")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--n", default="20:200:20")
    sp.add_argument("--margin", type=float, default=10.0)

    sp = add("mathieu-bands", cmd_mathieu_bands, "Bloch bands of the rational almost Mathieu operator")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--k", type=int, default=mathieu.K_RESOLUTION)
    sp.add_argument("--eigs", type=int, help="emit the eigen sweep of the truncation of this radius instead")

    sp = add("butterfly", cmd_butterfly, "Hofstadter butterfly band data")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--q-max", type=int, default=10)
    sp.add_argument("--k", type=int, default=mathieu.K_RESOLUTION)

    sp = add("gram-cert", cmd_gram_cert, "Gram-matrix independence certificate")
    sp.add_argument("--window", default="gaussian")
    sp.add_argument("--width", type=float, default=1.0)
    sp.add_argument("--degree", type=int, default=0)
    sp.add_argument("--atoms", required=True)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads < 1:
            raise ValueError("--threads must be at least 1")
        buf = io.StringIO()
        args.func(args, buf)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, OSError, RuntimeError) as exc:
        name = getattr(locals().get("args"), "command", "gll")
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"gll {name}: error: {msg}", file=sys.stderr)
        return 2
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
