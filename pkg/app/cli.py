"""
Batch front door.

    python -m app.cli spectrum --input square.json --count 10 --level 4 --out runs/square
    python -m app.cli hear --input invariants.json --out runs/hear
    python -m app.cli isoperimetric --n 6 --seed 7 --out runs/hexagon
    python -m app.cli gap-scan --d 4 8 16 32 --level 5 --out runs/gap
    python -m app.cli trapezoid-pairs --budget 200 --out runs/pairs
    python -m app.cli gww-check --level 5 --out runs/gww

Every run writes into its own directory: config.json (the resolved RunConfig),
a report JSON and the CSV/TSV tables. Logs go to stderr.

Exit status: 0 answered (a "not in class" verdict is an answer), 1 numeric
failure, 2 input error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from app.config import settings
from app.errors import NotInClassError
from app.models import HeatInvariants, ParallelogramParams, Polygon, Provenance
from app.schemas import RunConfig
from app.services import billiards, experiments, fem, formats, isoperimetric
from app.services import inverse_hearing as hearing
from app.services import mesh as meshing
from app.services import polygon as geometry
from app.services.exact_spectra import rectangle_spectrum
from app.services.heat_trace import default_t_window, fit_heat_invariants, geometric_heat_invariants

logger = logging.getLogger("app.cli")

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2

LEVEL_DEFAULTS = {"gap-scan": 5, "gww-check": 5}
HEAR_SHAPES = ("auto", "parallelogram", "rectangle", "trapezoid", "regular")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drumhead", description="Spectral geometry of planar polygons.")
    parser.add_argument("--log-level", default=None, help=f"Logging level (default: {settings.log_level})")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--out", default=settings.output_dir, help="Run directory for all outputs")
        p.add_argument("--seed", type=int, default=settings.random_seed, help="Seed for every random choice")
        p.add_argument("--tol", type=float, default=None, help="Tolerance (meaning depends on the subcommand)")

    def fem_flags(p: argparse.ArgumentParser):
        p.add_argument("--level", type=int, default=None, help="Finest refinement level")
        p.add_argument("--count", type=int, default=settings.default_count, help="Number of eigenvalues")
        p.add_argument("--no-extrapolate", action="store_true", help="Report raw finest-level values")

    p = sub.add_parser("spectrum", help="Dirichlet spectrum of polygons (exact for rectangles, FEM otherwise)")
    common(p)
    fem_flags(p)
    p.add_argument("--input", nargs="+", default=[], help="Polygon JSON files")
    p.add_argument("--shape", choices=("square", "gww"), default=None, help="Built-in shape instead of --input")
    p.add_argument("--export-mesh", action="store_true", help="Write .nodes/.tri files of the finest mesh")

    p = sub.add_parser("hear", help="Reconstruct a shape from heat invariants or a spectrum")
    common(p)
    p.add_argument("--input", required=True, help="Heat-invariants JSON or spectrum CSV")
    p.add_argument("--shape", choices=HEAR_SHAPES, default="auto", help="Target class")
    p.add_argument("--n", type=int, default=None, help="Vertex count for --shape regular")
    p.add_argument("--geodesic", type=float, default=None, help="Shortest closed geodesic (trapezoids)")
    p.add_argument("--ground-truth", default=None, help="Polygon JSON to compare the answer with")
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--t-points", type=int, default=20)
    p.add_argument("--resolution", type=int, default=settings.orbit_resolution, help="Orbit search grid")

    p = sub.add_parser("isoperimetric", help="Maximise area/perimeter^2 over convex n-gons")
    common(p)
    p.add_argument("--n", type=int, required=True, help="Number of vertices")
    p.add_argument("--input", nargs="?", default=None, help="Seed polygon JSON (random convex by default)")

    p = sub.add_parser("gap-scan", help="Fundamental gap of thin triangles")
    common(p)
    fem_flags(p)
    p.add_argument("--d", type=float, nargs="+", default=[4.0, 8.0, 16.0, 32.0], help="Triangle diameters")
    p.add_argument("--include-square", action="store_true", help="Add the unit square as a reference row")

    p = sub.add_parser("trapezoid-pairs", help="Two acute trapezoids sharing area, perimeter and a0")
    common(p)
    p.add_argument("--budget", type=int, default=200, help="Heights tried on each side of the base height")
    p.add_argument("--resolution", type=int, default=settings.orbit_resolution, help="Orbit search grid")

    p = sub.add_parser("gww-check", help="FEM check of the isospectral GWW pair against a perturbed control")
    common(p)
    fem_flags(p)
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if v is not None and k != "log_level"}
    if isinstance(values.get("input"), str):
        values["input"] = [values["input"]]
    values["inputs"] = values.pop("input", [])
    values["extrapolate"] = not values.pop("no_extrapolate", False)
    if "level" not in values:
        values["level"] = LEVEL_DEFAULTS.get(args.subcommand, settings.default_level)
    return RunConfig(**values)


def _profile(config: RunConfig) -> hearing.ToleranceProfile:
    return hearing.ToleranceProfile.noisy(config.tol) if config.tol else hearing.ToleranceProfile.exact()


def _is_rectangle(p: Polygon) -> bool:
    return p.n == 4 and bool(np.all(np.abs(geometry.interior_angles(p) - math.pi / 2) <= settings.geometry_tol))


# ---- spectrum --------------------------------------------------------------


def _spectrum_inputs(config: RunConfig) -> list[tuple[str, Polygon]]:
    if config.shape == "square":
        return [("square", geometry.make_rectangle(1.0, 1.0))]
    if config.shape == "gww":
        first, second = geometry.gww_pair()
        return [("gww1", first), ("gww2", second)]
    if not config.inputs:
        raise ValueError("spectrum needs --input or --shape.")
    named, seen = [], set()
    for i, path in enumerate(config.inputs):
        name = Path(path).stem
        if name in seen:
            name = f"{name}_{i}"
        seen.add(name)
        named.append((name, formats.read_polygon(Path(path))))
    return named


def cmd_spectrum(config: RunConfig, run_dir: Path) -> int:
    shapes = _spectrum_inputs(config)
    report = {"seed": config.seed, "shapes": {}}
    spectra = []
    for name, p in shapes:
        entry = {"polygon": formats.polygon_payload(p)}
        if _is_rectangle(p):
            lengths = geometry.edge_lengths(p)
            s = rectangle_spectrum(float(lengths[0]), float(lengths[1]), count=config.count)
            entry.update(method=Provenance.EXACT.value)
        else:
            result = fem.dirichlet_eigenvalues(
                p, count=config.count, level=config.level, extrapolate=config.extrapolate,
            )
            s = result.spectrum
            (run_dir / f"{name}.history.csv").write_text(formats.history_csv(result))
            entry.update(
                method=Provenance.FEM.value,
                level=result.level,
                extrapolated=result.extrapolated,
                interior_nodes=result.interior_nodes,
            )
            if config.export_mesh:
                mesh = meshing.triangulate(p, config.level)
                entry["mesh"] = [path.name for path in formats.write_mesh(mesh, run_dir / name)]
        (run_dir / f"{name}.spectrum.csv").write_text(formats.spectrum_csv(s))
        entry["first_eigenvalue"] = float(s.eigenvalues[0])
        report["shapes"][name] = entry
        spectra.append(s)

    if len(spectra) == 2:
        table = formats.comparison_csv(*spectra)
        (run_dir / "comparison.csv").write_text(table)
        a, b = spectra
        k = min(a.count, b.count)
        diffs = np.abs(a.eigenvalues[:k] - b.eigenvalues[:k]) / np.maximum(a.eigenvalues[:k], b.eigenvalues[:k])
        report["max_relative_difference"] = float(diffs.max())
    formats.write_json(run_dir / "spectrum.json", report)
    return EXIT_OK


# ---- hear ------------------------------------------------------------------


def _invariants_from_input(config: RunConfig, report: dict) -> tuple[HeatInvariants, float | None, bool]:
    """Heat invariants, geodesic and whether the invariants were fitted from a spectrum."""
    path = Path(config.inputs[0])
    if path.suffix.lower() != ".csv":
        inv, geodesic = formats.read_heat_invariants(path)
        return inv, geodesic, False

    s = formats.read_spectrum_csv(path.read_text())
    if config.t_min is not None and config.t_max is not None:
        t_grid = np.logspace(math.log10(config.t_min), math.log10(config.t_max), config.t_points)
    elif config.t_min is None and config.t_max is None:
        t_grid = default_t_window(s, points=config.t_points).t_grid
    else:
        raise ValueError("Give both --t-min and --t-max, or neither.")
    truth = formats.read_polygon(Path(config.ground_truth)) if config.ground_truth else None
    fit = fit_heat_invariants(s, t_grid, polygon=truth)
    report["fit"] = {
        "area": fit.invariants.area,
        "perimeter": fit.invariants.perimeter,
        "a0": fit.invariants.a0,
        "residual": fit.residual,
        "window": list(fit.window),
        "points": fit.points,
        "condition": fit.condition,
        "outside_hypothesis": fit.outside_hypothesis,
    }
    return fit.invariants, None, True


def _hear(config: RunConfig, inv: HeatInvariants, geodesic: float | None, profile) -> tuple[dict, Polygon | None]:
    shape = config.shape or "auto"
    if shape == "auto":
        if geodesic is not None:
            shape = "trapezoid"
        elif abs(inv.a0 - 0.25) <= profile.regeneration * max(1.0, abs(inv.a0)):
            shape = "rectangle"
        else:
            shape = "parallelogram"

    if shape == "parallelogram":
        params = hearing.hear_parallelogram(inv, profile)
        p = geometry.make_parallelogram(params)
        return {"class": shape, "L": params.L, "W": params.W, "alpha": params.alpha}, p
    if shape == "rectangle":
        length, width = hearing.hear_rectangle(inv, profile)
        p = geometry.make_parallelogram(ParallelogramParams(L=length, W=width, alpha=math.pi / 2))
        return {"class": shape, "L": length, "W": width, "alpha": math.pi / 2}, p
    if shape == "trapezoid":
        if geodesic is None:
            raise ValueError("Hearing a trapezoid needs the shortest closed geodesic (--geodesic).")
        t = hearing.hear_acute_trapezoid(inv, geodesic, profile)
        length, _ = billiards.shortest_closed_geodesic(t, resolution=config.resolution)
        answer = {"class": shape, "B": t.B, "b": t.b, "h": t.h, "alpha": t.alpha, "beta": t.beta,
                  "geodesic_check": length}
        return answer, geometry.make_trapezoid(t)
    # regular
    if config.n is None:
        raise ValueError("Hearing a regular polygon needs --n.")
    side = hearing.detect_regular(config.n, inv.area, inv.perimeter, tol=profile.discriminant)
    if side is None:
        raise NotInClassError(f"Area and perimeter do not belong to a regular {config.n}-gon.")
    return {"class": shape, "n": config.n, "side": side}, geometry.make_regular_ngon(config.n, side)


def cmd_hear(config: RunConfig, run_dir: Path) -> int:
    report: dict = {"seed": config.seed}
    inv, geodesic, fitted = _invariants_from_input(config, report)
    if config.geodesic is not None:
        geodesic = config.geodesic
    profile = _profile(config)
    noisy = fitted or bool(config.tol)
    if fitted and not config.tol:
        # fitted invariants carry the fit error; exact guards would reject them
        profile = hearing.ToleranceProfile.noisy(1e-3)
    report["invariants"] = {"area": inv.area, "perimeter": inv.perimeter, "a0": inv.a0, "geodesic": geodesic}
    report["tolerance"] = {"discriminant": profile.discriminant, "regeneration": profile.regeneration}

    try:
        answer, p = _hear(config, inv, geodesic, profile)
    except NotInClassError as e:
        logger.info("Not in class: %s", e)
        report.update(status="not_in_class", reason=str(e))
        formats.write_json(run_dir / "hear.json", report)
        return EXIT_OK

    report.update(status="answered", answer=answer, mismatch=hearing.invariant_mismatch(inv, p))
    formats.write_json(run_dir / "polygon.json", formats.polygon_payload(p))
    if config.ground_truth:
        truth = formats.read_polygon(Path(config.ground_truth))
        verdict_tol = settings.congruence_tol
        if noisy:
            # the parameters depend on the invariants through square roots
            verdict_tol = max(verdict_tol, 10 * math.sqrt(profile.discriminant))
        report["ground_truth"] = {
            "congruent": geometry.congruent(p, truth, tol=verdict_tol),
            "tolerance": verdict_tol,
            "invariant_mismatch": hearing.invariant_mismatch(inv, truth),
        }
    formats.write_json(run_dir / "hear.json", report)
    return EXIT_OK


# ---- isoperimetric ---------------------------------------------------------


def cmd_isoperimetric(config: RunConfig, run_dir: Path) -> int:
    n = config.n
    if config.inputs:
        seed_polygon = formats.read_polygon(Path(config.inputs[0]))
    else:
        if n is None or n < 3:
            raise ValueError(f"Need n >= 3, got {n}.")
        seed_polygon = geometry.random_convex_polygon(n, np.random.default_rng(config.seed))
    result = isoperimetric.maximize_f(n, seed_polygon, tol=config.tol)

    target = isoperimetric.regular_f(n)
    (run_dir / "trajectory.csv").write_text(formats.trajectory_csv(result))
    formats.write_json(run_dir / "polygon.json", formats.polygon_payload(result.polygon))
    report = {
        "seed": config.seed,
        "n": n,
        "f": result.f,
        "regular_f": target,
        "difference": target - result.f,
        "matches_regular": abs(target - result.f) <= 1e-8,
        "converged": result.converged,
        "iterations": result.iterations,
        "residual": result.residual,
        "steps": len(result.steps),
    }
    formats.write_json(run_dir / "isoperimetric.json", report)
    return EXIT_OK if result.converged else EXIT_NUMERIC


# ---- experiments -----------------------------------------------------------


def cmd_gap_scan(config: RunConfig, run_dir: Path) -> int:
    scan = experiments.gap_scan(config.d, level=config.level, include_square=config.include_square)
    rows = [
        (r.shape, r.d, r.lambda1, r.lambda2, r.gap, r.scaled_gap, r.error or "")
        for r in scan.rows
    ]
    header = ["shape", "d", "lambda1", "lambda2", "gap", "gap_d23", "error"]
    (run_dir / "gap_scan.csv").write_text(formats.table(rows, header))
    formats.write_json(
        run_dir / "gap_scan.json",
        {"seed": config.seed, "level": config.level, "slope": scan.slope, "c_fit": scan.c_fit,
         "failed_rows": sum(1 for r in scan.rows if r.error)},
    )
    return EXIT_OK


def _trapezoid_payload(t) -> dict:
    return {"B": t.B, "b": t.b, "h": t.h, "alpha": t.alpha, "beta": t.beta}


def cmd_trapezoid_pairs(config: RunConfig, run_dir: Path) -> int:
    tol = 1e-8 if config.tol is None else config.tol
    pair = experiments.trapezoid_pairs(budget=config.budget, tol=tol)
    report: dict = {"seed": config.seed, "budget": config.budget, "tol": tol}
    if pair is None:
        report["status"] = "budget_exhausted"
    else:
        first = geometric_heat_invariants(geometry.make_trapezoid(pair.first))
        second = geometric_heat_invariants(geometry.make_trapezoid(pair.second))
        report.update(
            status="found",
            first=_trapezoid_payload(pair.first),
            second=_trapezoid_payload(pair.second),
            invariants=[[first.area, first.perimeter, first.a0], [second.area, second.perimeter, second.a0]],
            mismatch=pair.mismatch,
            geodesics=[
                billiards.shortest_closed_geodesic(t, resolution=config.resolution)[0]
                for t in (pair.first, pair.second)
            ],
        )
    formats.write_json(run_dir / "trapezoid_pairs.json", report)
    return EXIT_OK


def cmd_gww_check(config: RunConfig, run_dir: Path) -> int:
    report = experiments.gww_check(level=config.level, count=config.count)
    first, second, control = report.eigenvalues
    rows = [
        (k + 1, float(first[k]), float(second[k]), float(control[k]),
         float(report.pair_difference[k]), float(report.control_difference[k]))
        for k in range(len(first))
    ]
    header = ["index", "gww1", "gww2", "control", "pair_relative_difference", "control_relative_difference"]
    (run_dir / "gww.csv").write_text(formats.table(rows, header))
    formats.write_json(
        run_dir / "gww.json",
        {"seed": config.seed, "level": report.level, "isospectral": report.isospectral,
         "control_distinguished": report.control_distinguished,
         "max_pair_difference": float(report.pair_difference.max()),
         "max_control_difference": float(report.control_difference.max())},
    )
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "hear": cmd_hear,
    "isoperimetric": cmd_isoperimetric,
    "gap-scan": cmd_gap_scan,
    "trapezoid-pairs": cmd_trapezoid_pairs,
    "gww-check": cmd_gww_check,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = run_config(args)
        run_dir = Path(config.out)
        run_dir.mkdir(parents=True, exist_ok=True)
        formats.write_json(run_dir / "config.json", config.model_dump())
        return COMMANDS[config.subcommand](config, run_dir)
    except np.linalg.LinAlgError as e:
        # a ValueError subclass, but a numeric failure
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as e:
        # includes pydantic validation, JSON decoding and shape errors
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
