"""Command-line interface: ``rigidemt {emt,effective,field,density,verify,shapes}``.

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .density import DegenerateSystemError, canonical_densities, solve_first_order, total_field
from .effective import BeyondDiluteError, GeometryError, sweep, parse_fractions, volume_fraction
from .elastic import CANONICAL, LameMaterial, Loading, MaterialError, constants, load_material
from .emt import InconsistencyError, closed_form_emt, emt_from_densities
from .geometry import PRESETS, ExteriorMap, InvalidMapError, ShapeFileError, inverse_map, load_shape, validate
from .io import csv_text, dumps, load_matrix, write_text
from .oracle import OracleError
from .series import SeriesConsistencyError

log = logging.getLogger("rigidemt")

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# ----- helpers -------------------------------------------------------------------

def _shape(args) -> ExteriorMap:
    phi = load_shape(args.shape)
    rep = validate(phi)
    if not rep.ok:
        raise InvalidMapError(rep.message)
    if args.truncation < phi.degree + 1:
        raise UsageError(f"--truncation must be at least degree + 1 = {phi.degree + 1}")
    if phi.degree > 8:
        log.warning("degree-%d map: series orders grow like N^2", phi.degree)
    return phi


def _material(args) -> LameMaterial:
    if args.material is None:
        return constants(1.0, 1.0)
    try:
        return load_material(args.material)
    except FileNotFoundError:
        raise MaterialError(f"{args.material}: no such file") from None


def _entry_name(i, j, k, l):  # noqa: E741
    return f"m{i}{j}{k}{l}"


def _emt_report(phi, mat, args) -> dict:
    dens = canonical_densities(phi, mat)
    emt = emt_from_densities(dens, phi, mat, check=True, tol=args.tol)
    entries = {
        _entry_name(i, j, k, l): emt.entry(i, j, k, l)
        for i in (1, 2) for j in (1, 2) for k in (1, 2) for l in (1, 2)  # noqa: E741
    }
    rep = {
        "shape": phi.to_dict(),
        "material": {**mat.to_dict(), "alpha": mat.alpha, "beta": mat.beta, "kappa": mat.kappa},
        "area": emt.area,
        "entries": entries,
        "mandel": emt.mandel,
        "voigt_unweighted": emt.voigt,
        "e_pairs": {f"E({s},{p.index})": (p.e1 if s == 1 else p.e2) for p in emt.pairs for s in (1, 2)},
        "diagnostics": {
            "boundary_residuals": {t: d.residual for t, d in zip(CANONICAL, dens)},
            "rigid_motions": {t: list(d.b) for t, d in zip(CANONICAL, dens)},
            "condition_numbers": {t: d.condition for t, d in zip(CANONICAL, dens)},
            "identities": emt.diagnostics["identities"],
            "relative_asymmetry": emt.diagnostics["asymmetry"],
            "m1122_short_form": emt.diagnostics["statement_m1122"],
            "m1122_short_form_defect": emt.diagnostics["statement_m1122_defect"],
            "truncation": args.truncation,
            "backend": BACKEND,
        },
    }
    if phi.degree <= 3:
        cf = closed_form_emt(phi, mat)
        diff = float(np.max(np.abs(cf.m - emt.m)) / max(np.max(np.abs(emt.m)), 1e-300))
        rep["closed_form"] = {
            "entries": {
                _entry_name(i, j, k, l): float(cf.m[i - 1, j - 1, k - 1, l - 1])
                for i in (1, 2) for j in (1, 2) for k in (1, 2) for l in (1, 2)  # noqa: E741
            },
            "max_relative_difference": diff,
        }
    else:
        rep["closed_form"] = None
        rep["note"] = f"no closed form for degree {phi.degree} maps (available for degree <= 3)"
    return rep, emt


# ----- subcommands ---------------------------------------------------------------------

def cmd_emt(args) -> int:
    phi, mat = _shape(args), _material(args)
    rep, emt = _emt_report(phi, mat, args)
    if args.format == "csv":
        rows = [(k, v) for k, v in rep["entries"].items()]
        for key, val in rep["e_pairs"].items():
            rows.append((f"{key}.re", val.real))
            rows.append((f"{key}.im", val.imag))
        write_text(csv_text(["quantity", "value"], rows), args.out)
    else:
        write_text(dumps(rep), args.out)
    return EXIT_OK


def cmd_effective(args) -> int:
    phi, mat = _shape(args), _material(args)
    _, emt = _emt_report(phi, mat, args)
    s = load_matrix(args.s_matrix) if args.s_matrix else None
    f_incl = volume_fraction(phi, args.cell_area)
    fractions = parse_fractions(args.fractions) if args.fractions else [f_incl]
    bad = [f for f in fractions if not 0.0 <= f < 1.0]
    if bad:
        raise UsageError(f"fractions must lie in [0, 1): {bad}")
    rows = sweep(mat, emt, fractions, s)
    header = ["f", "C11", "C12", "C13", "C22", "C23", "C33", "isotropy_deviation", "asymmetry", "flag"]
    out_rows = []
    for r in rows:
        if r["ok"]:
            out_rows.append([r["f"]] + [r[k] for k in header[1:9]] + [""])
        else:
            out_rows.append([r["f"]] + [""] * 8 + ["singular"])
    if args.format == "json":
        write_text(dumps({"cell_area": args.cell_area, "inclusion_fraction": f_incl, "rows": rows}), args.out)
    else:
        write_text(csv_text(header, out_rows), args.out)
    return EXIT_OK


def parse_grid(text: str, phi: ExteriorMap):
    """``ring:R:n`` (circle ``|w| = R gamma``) or ``box:x0:x1:y0:y1:nx:ny`` in the physical plane."""
    parts = text.split(":")
    try:
        if parts[0] == "ring" and len(parts) == 3:
            R, n = float(parts[1]), int(parts[2])
            w = R * phi.gamma * np.exp(2j * np.pi * np.arange(n) / n)
            return phi(w), w
        if parts[0] == "box" and len(parts) == 7:
            x0, x1, y0, y1 = (float(p) for p in parts[1:5])
            nx, ny = int(parts[5]), int(parts[6])
            X, Y = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny))
            z = (X + 1j * Y).ravel()
            return z, inverse_map(phi, z)
    except ValueError as exc:
        raise UsageError(f"bad --grid {text!r}: {exc}") from None
    raise UsageError(f"bad --grid {text!r}: expected ring:R:n or box:x0:x1:y0:y1:nx:ny")


def cmd_field(args) -> int:
    phi, mat = _shape(args), _material(args)
    dc = solve_first_order(phi, mat, _loading(args.loading))
    z, w = parse_grid(args.grid, phi)
    inside = ~np.isfinite(w) | (np.abs(np.where(np.isfinite(w), w, 0)) <= phi.gamma)
    u = np.empty(z.size, dtype=np.complex128)
    if np.any(~inside):
        u[~inside] = total_field(dc, w[~inside], allow_boundary=True)
    b1, b2, b3 = dc.b
    u[inside] = b1 + 1j * b2 - 1j * b3 * z[inside]
    rows = [[float(zz.real), float(zz.imag), float(uu.real), float(uu.imag), int(f)]
            for zz, uu, f in zip(z, u, inside)]
    write_text(csv_text(["x", "y", "re_u", "im_u", "interior"], rows), args.out)
    return EXIT_OK


def _loading(tag: str) -> Loading:
    if tag in CANONICAL:
        return Loading.canonical(tag)
    try:
        A, B = (complex(p.replace(" ", "")) for p in tag.split(","))
    except ValueError:
        raise UsageError(f"loading must be U1, U2, U3 or 'A,B' with complex A, B; got {tag!r}") from None
    return Loading("General", A, B)


def cmd_density(args) -> int:
    phi, mat = _shape(args), _material(args)
    tags = CANONICAL if args.loading == "all" else (args.loading,)
    out = [solve_first_order(phi, mat, _loading(t)).to_dict() for t in tags]
    write_text(dumps(out[0] if len(out) == 1 else out), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import informational_checks, run_suite

    checks = run_suite(tol=args.tol, seed=args.seed, quick=args.quick, convention=args.kappa_convention)
    info = informational_checks()
    for c in checks:
        print(c.line(), file=sys.stderr)
    for c in info:
        print("(info) " + c.line(), file=sys.stderr)
    ok = all(c.passed for c in checks)
    rep = {
        "passed": ok,
        "tol": args.tol,
        "seed": args.seed,
        "backend": BACKEND,
        "checks": [c.to_dict() for c in checks],
        "informational": [c.to_dict() for c in info],
    }
    for c in rep["checks"] + rep["informational"]:
        c.pop("seconds")
    write_text(dumps(rep), args.out)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_shapes(args) -> int:
    rows = {}
    for name, phi in PRESETS.items():
        from .geometry import area

        rows[name] = {**phi.to_dict(), "degree": phi.degree, "area": area(phi)}
    if args.out and Path(args.out).suffix == "":
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        for name, phi in PRESETS.items():
            write_text(dumps(phi.to_dict()), d / f"{name}.json")
        return EXIT_OK
    write_text(dumps(rows), args.out)
    return EXIT_OK


# ----- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--shape", default="disk", help="shape JSON file or preset name (default: disk)")
    common.add_argument("--material", default=None, help="material JSON file (default: lambda = mu = 1)")
    common.add_argument("--truncation", type=int, default=64, help="series truncation budget (default 64)")
    common.add_argument("--tol", type=float, default=1e-10, help="relative tolerance (default 1e-10)")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="rigidemt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("emt", parents=[common], help="first-order EMT report")
    s.set_defaults(func=cmd_emt, fmt_default="json")

    s = sub.add_parser("effective", parents=[common], help="effective stiffness sweep")
    s.add_argument("--fractions", default=None, help="START:STOP:STEP or comma list (default: inclusion fraction)")
    s.add_argument("--cell-area", type=float, default=1.0)
    s.add_argument("--s-matrix", default=None, help="JSON 3x3 lattice matrix S (default 0)")
    s.set_defaults(func=cmd_effective, fmt_default="csv")

    s = sub.add_parser("field", parents=[common], help="displacement samples on a grid")
    s.add_argument("--loading", default="U1", help="U1, U2, U3 or 'A,B'")
    s.add_argument("--grid", default="ring:2:64", help="ring:R:n or box:x0:x1:y0:y1:nx:ny")
    s.set_defaults(func=cmd_field, fmt_default="csv")

    s = sub.add_parser("density", parents=[common], help="density coefficient dump")
    s.add_argument("--loading", default="all", help="U1, U2, U3, 'A,B' or all")
    s.set_defaults(func=cmd_density, fmt_default="json")

    s = sub.add_parser("verify", parents=[common], help="run the verification suite")
    s.add_argument("--quick", action="store_true", help="smaller random set and oracle")
    s.add_argument("--kappa-convention", choices=("plane_strain", "plane_stress"), default="plane_strain")
    s.set_defaults(func=cmd_verify, fmt_default="json")

    s = sub.add_parser("shapes", parents=[common], help="list bundled preset shapes")
    s.set_defaults(func=cmd_shapes, fmt_default="json")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.format is None:
        args.format = args.fmt_default
    if not (args.tol > 0 and math.isfinite(args.tol)):
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except (ShapeFileError, InvalidMapError, MaterialError, GeometryError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (json.JSONDecodeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegenerateSystemError, InconsistencyError, OracleError, SeriesConsistencyError,
            BeyondDiluteError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
