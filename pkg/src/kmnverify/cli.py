"""Command-line entry point: ``kmnverify <command> ...``.

Exit codes: 0 when every asserted check passes, 1 when a check fails,
2 for invalid input (manifest, expression or precondition errors).
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .config import configure_logging, settings
from .conformal import flatness_test
from .deformation import apply_deformation, predicted_kmn
from .examples import ENTRY_NAMES, get_entry, registry
from .expr import ExprError
from .geometry import EvaluationError, Manifest, ManifestError, ManifoldSpec, PreconditionError, load_manifest
from .kmn import check_dim5_rigidity, dim3_reduction, extract_kmn, extract_over_grid, fit_space_form
from .verify import CheckStatus, VerificationReport, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


def resolve_manifest(source: str) -> ManifoldSpec:
    """A path to a manifest file, or the name of a registry entry."""
    path = Path(source)
    if path.exists():
        return load_manifest(path)
    if source in ENTRY_NAMES:
        return get_entry(source).spec
    raise ManifestError(f"No manifest file or registry entry named '{source}'")


def _print_report(report: VerificationReport) -> None:
    print(f"{report.manifest.name} ({report.manifest.backend}, dim {report.manifest.dimension}, {report.parameters.points} points)")
    for section, checks in report.sections.items():
        print(f"[{section}]")
        for c in checks:
            if c.status == CheckStatus.SKIPPED:
                print(f"  {c.status.value:7s} {c.name:40s} {c.reason}")
            else:
                residual = "" if c.max_residual is None else f"{c.max_residual:.3e}"
                tol = "" if c.tolerance is None else f"<= {c.tolerance:.1e}"
                extra = f" ({c.reason})" if c.reason else ""
                print(f"  {c.status.value:7s} {c.name:40s} {residual:>10s} {tol}{extra}")
    s = report.summary
    print(f"{s.passed} passed, {s.failed} failed, {s.skipped} skipped")


def _write(text: str, output: str) -> None:
    Path(output).write_text(text + "\n", encoding="utf-8")
    logger.info(f"Wrote {output}")


def cmd_verify(args: argparse.Namespace) -> int:
    spec = resolve_manifest(args.manifest)
    report = run_suite(spec, grid=args.grid, fd_step=args.fd_step)
    if args.json_out == "-":
        print(report.model_dump_json(indent=2))
    else:
        if args.json_out:
            _write(report.model_dump_json(indent=2), args.json_out)
        _print_report(report)
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_extract(args: argparse.Namespace) -> int:
    spec = resolve_manifest(args.manifest)
    grid = extract_over_grid(spec, spec.sample_points(args.grid))
    if args.json:
        print(grid.model_dump_json(indent=2))
        return EXIT_OK
    print(f"{'point':>28s} {'kappa':>12s} {'mu':>12s} {'nu':>12s} {'residual':>10s}")
    for r in grid.results:
        point = ", ".join(f"{x:.3g}" for x in r.point)
        mu = "-" if r.degenerate else f"{r.mu:.6f}"
        nu = "-" if r.degenerate else f"{r.nu:.6f}"
        print(f"{point:>28s} {r.kappa:12.6f} {mu:>12s} {nu:>12s} {r.residual:10.2e}")
    spread = ", ".join(f"{k} {v:.2e}" for k, v in grid.spread.items())
    print(f"spread: {spread}; max residual {grid.max_residual:.2e}")
    return EXIT_OK


def cmd_deform(args: argparse.Namespace) -> int:
    spec = resolve_manifest(args.manifest)
    deformed = apply_deformation(spec, args.a)
    if args.emit:
        Path(args.emit).write_text(deformed.to_json() + "\n", encoding="utf-8")
        logger.info(f"Wrote deformed manifest to {args.emit}")
    center = spec.center()
    before = extract_kmn(spec, center)
    after = extract_kmn(deformed, center)
    predicted = predicted_kmn(before.kappa, before.mu, before.nu, args.a)
    payload = {
        "manifest": deformed.name,
        "a": args.a,
        "point": [float(x) for x in center],
        "original": before.model_dump(),
        "extracted": after.model_dump(),
        "predicted": predicted,
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    spec = resolve_manifest(args.manifest)
    center = spec.center()
    columns: Optional[List[int]] = args.columns
    fit = fit_space_form(spec, center, columns)
    payload = {"manifest": spec.name, "fit": fit.model_dump()}
    if spec.dimension == 3:
        payload["reduced"] = dim3_reduction(fit)
    else:
        payload["rigidity"] = check_dim5_rigidity(fit, tolerance=settings.oracle_tolerance).model_dump()
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_conformal(args: argparse.Namespace) -> int:
    spec = resolve_manifest(args.manifest)
    report = flatness_test(spec, spec.sample_points(args.grid))
    print(report.model_dump_json(indent=2, exclude={"schouten"}))
    expected = spec.expected.flat if spec.expected is not None else None
    if expected is not None and expected != report.conformally_flat:
        return EXIT_FAILED
    return EXIT_OK


def cmd_examples(args: argparse.Namespace) -> int:
    status = EXIT_OK
    for entry in registry():
        line = f"{entry.name:18s} {entry.spec.backend.value:6s} dim {entry.spec.dimension}"
        if args.verify:
            report = run_suite(entry.spec)
            s = report.summary
            line += f"  {s.passed} passed, {s.failed} failed, {s.skipped} skipped"
            if not report.ok:
                status = EXIT_FAILED
        else:
            line += f"  {entry.spec.description}"
        print(line)
    return status


def cmd_schema(args: argparse.Namespace) -> int:
    model = Manifest if args.which == "manifest" else VerificationReport
    print(json.dumps(model.model_json_schema(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kmnverify", description="Curvature verification for contact metric manifolds")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="", help="Override KMN_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="Run the full verification suite")
    p.add_argument("manifest", help="Manifest file or registry entry name")
    p.add_argument("--grid", type=int, default=None, help="Samples per axis")
    p.add_argument("--fd-step", type=float, default=None)
    p.add_argument(
        "--json", "--output", "-o", dest="json_out", metavar="OUT", default=None, help="Write the JSON report to OUT ('-' for stdout)"
    )
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("extract", help="Tabulate kappa, mu, nu over the sample grid")
    p.add_argument("manifest")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_extract)

    p = sub.add_parser("deform", help="Apply a D_a-homothetic deformation")
    p.add_argument("manifest")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--emit", default=None, help="Write the deformed manifest to this path")
    p.set_defaults(handler=cmd_deform)

    p = sub.add_parser("fit", help="Fit the eight-tensor space-form model at the domain center")
    p.add_argument("manifest")
    p.add_argument("--columns", type=int, nargs="+", default=None, help="1-based basis tensors to use")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("conformal", help="Conformal flatness test")
    p.add_argument("manifest")
    p.add_argument("--grid", type=int, default=None)
    p.set_defaults(handler=cmd_conformal)

    p = sub.add_parser("examples", help="List the built-in registry")
    p.add_argument("--verify", action="store_true", help="Run the suite on every entry")
    p.set_defaults(handler=cmd_examples)

    p = sub.add_parser("schema", help="Print a JSON schema")
    p.add_argument("which", choices=["manifest", "report"])
    p.set_defaults(handler=cmd_schema)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except (ManifestError, ExprError, EvaluationError, PreconditionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
