"""Command-line interface.

Subcommands: ``build-lattice``, ``estimate``, ``homerange``, ``simulate``.
Every run writes a directory of fixed-name output files plus a
``run_summary.json`` recording all parameters, the seed, and content digests
of the input files, so any run can be reproduced exactly.

Exit codes: 0 success; 1 when warnings occurred and ``--strict`` was given;
2 on input or validation errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import secrets
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .crossval import write_trace_csv
from .estimator import (
    estimate,
    grid_export,
    home_range,
    load_observations_csv,
    write_homerange_csv,
    write_homerange_summary_csv,
    write_raster_csv,
)
from .diffusion import write_density_csv
from .geometry import load_region
from .lattice import (
    GRID8,
    DistanceBand,
    apply_edits,
    build_adjacency,
    connectivity_report,
    generate_nodes,
    load_edit_script,
    write_links_csv,
    write_nodes_csv,
)
from .sim import SimulationConfig, format_summary, run_comparison, write_ise_csv


def _parse_rule(text: str):
    if text == "grid8":
        return GRID8
    if text.startswith("band:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"rule must be grid8 or band:LO:HI, got {text!r}")
        try:
            lo, hi = float(parts[1]), float(parts[2])
        except ValueError:
            raise ValueError(f"rule band bounds must be numbers, got {text!r}") from None
        if hi < lo:
            raise ValueError(f"band upper bound {hi} is below lower bound {lo}")
        return DistanceBand(lo, hi)
    raise ValueError(f"rule must be grid8 or band:LO:HI, got {text!r}")


def _parse_k(text: str):
    if text == "auto":
        return "auto"
    try:
        k = int(text)
    except ValueError:
        raise ValueError(f"--k must be auto or a nonnegative integer, got {text!r}") from None
    if k < 0:
        raise ValueError("--k must be nonnegative")
    return k


@dataclass
class RunConfig:
    """Validated parameters for one CLI run."""

    command: str
    region: Path | None
    obs: Path | None
    edits: Path | None
    spacing: float | None
    mobility: float
    rule: object
    k: object
    k_max: int
    window: int
    coverage: float
    resolution: int
    seed: int
    seed_given: bool
    replicates: int
    out: Path
    strict: bool

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        command = args.command
        spacing = getattr(args, "spacing", None)
        if command in ("build-lattice", "estimate", "homerange"):
            if spacing is None:
                raise ValueError("--spacing is required")
            if spacing <= 0:
                raise ValueError("--spacing must be positive")
        mobility = getattr(args, "mobility", 0.5)
        if not (0.0 < mobility <= 1.0):
            raise ValueError("--mobility must be in (0, 1]")
        k_max = getattr(args, "kmax", 1000)
        if k_max < 1:
            raise ValueError("--kmax must be at least 1")
        window = getattr(args, "window", 30)
        if window < 1:
            raise ValueError("--window must be at least 1")
        coverage = getattr(args, "coverage", 0.95)
        if not (0.0 < coverage < 1.0):
            raise ValueError("--coverage must be strictly between 0 and 1")
        resolution = getattr(args, "resolution", 200)
        if resolution < 2:
            raise ValueError("--resolution must be at least 2")
        replicates = getattr(args, "replicates", 20)
        if replicates < 1:
            raise ValueError("--replicates must be at least 1")
        seed_given = getattr(args, "seed", None) is not None
        seed = args.seed if seed_given else secrets.randbits(48)
        return cls(
            command=command,
            region=Path(args.region) if getattr(args, "region", None) else None,
            obs=Path(args.obs) if getattr(args, "obs", None) else None,
            edits=Path(args.edits) if getattr(args, "edits", None) else None,
            spacing=spacing,
            mobility=mobility,
            rule=_parse_rule(getattr(args, "rule", "grid8")),
            k=_parse_k(getattr(args, "k", "auto")),
            k_max=k_max,
            window=window,
            coverage=coverage,
            resolution=resolution,
            seed=seed,
            seed_given=seed_given,
            replicates=replicates,
            out=Path(args.out),
            strict=bool(getattr(args, "strict", False)),
        )

    def rule_text(self) -> str:
        if self.rule == GRID8:
            return "grid8"
        return f"band:{self.rule.lo:g}:{self.rule.hi:g}"


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_summary(cfg: RunConfig, extra: dict, warnings: list[str]) -> None:
    inputs = {}
    for name, path in (("region", cfg.region), ("obs", cfg.obs), ("edits", cfg.edits)):
        if path is not None:
            inputs[name] = {"path": str(path), "sha256": _sha256(path)}
    payload = {
        "command": cfg.command,
        "version": __version__,
        "parameters": {
            "spacing": cfg.spacing,
            "mobility": cfg.mobility,
            "rule": cfg.rule_text(),
            "k": cfg.k,
            "k_max": cfg.k_max,
            "window": cfg.window,
            "coverage": cfg.coverage,
            "resolution": cfg.resolution,
            "replicates": cfg.replicates,
            "seed": cfg.seed,
            "strict": cfg.strict,
        },
        "inputs": inputs,
        "warnings": warnings,
    }
    payload.update(extra)
    with open(cfg.out / "run_summary.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _build_lattice(cfg: RunConfig):
    region = load_region(cfg.region)
    lat = generate_nodes(region, cfg.spacing)
    lat = build_adjacency(lat, region, cfg.rule)
    if cfg.edits is not None:
        lat = apply_edits(lat, load_edit_script(cfg.edits))
    return region, lat


def _write_connectivity(report, path: Path) -> None:
    with open(path, "w") as fh:
        fh.write(f"components: {report.component_count}\n")
        for c, comp in enumerate(report.components):
            fh.write(f"component {c}: size {len(comp)} (min id {comp[0]})\n")
        iso = ", ".join(str(i) for i in report.isolated)
        fh.write(f"isolated nodes ({len(report.isolated)}): {iso}\n")


def cmd_build_lattice(cfg: RunConfig) -> list[str]:
    region, lat = _build_lattice(cfg)
    report = connectivity_report(lat)
    write_nodes_csv(lat, cfg.out / "nodes.csv")
    write_links_csv(lat, cfg.out / "links.csv")
    _write_connectivity(report, cfg.out / "connectivity.txt")
    warnings = []
    if report.isolated:
        warnings.append(f"{len(report.isolated)} isolated nodes: {list(report.isolated)}")
    if report.component_count > 1:
        warnings.append(f"lattice is disconnected ({report.component_count} components)")
    _write_summary(
        cfg,
        {
            "node_count": lat.node_count,
            "link_count": len(lat.adjacency),
            "component_count": report.component_count,
            "isolated_nodes": list(report.isolated),
        },
        warnings,
    )
    return warnings


def _run_estimate(cfg: RunConfig):
    region = load_region(cfg.region)
    obs = load_observations_csv(cfg.obs)
    edits = load_edit_script(cfg.edits) if cfg.edits is not None else None
    result = estimate(
        region,
        obs,
        spacing=cfg.spacing,
        mobility=cfg.mobility,
        rule=cfg.rule,
        edits=edits,
        k=cfg.k,
        k_max=cfg.k_max,
        window=cfg.window,
    )
    write_nodes_csv(result.lattice, cfg.out / "nodes.csv")
    write_links_csv(result.lattice, cfg.out / "links.csv")
    write_density_csv(result.density, result.lattice, cfg.out / "density.csv")
    raster = grid_export(result, cfg.resolution)
    write_raster_csv(raster, cfg.out / "raster.csv")
    if result.trace is not None:
        write_trace_csv(result.trace, cfg.out / "ucv_trace.csv")
    return result


def cmd_estimate(cfg: RunConfig) -> list[str]:
    result = _run_estimate(cfg)
    _write_summary(
        cfg,
        {
            "node_count": result.lattice.node_count,
            "observation_count": result.assignment.n,
            "selected_k": result.k_used,
            "ucv_at_edge": bool(result.trace.at_edge) if result.trace else None,
        },
        result.warnings,
    )
    return result.warnings


def cmd_homerange(cfg: RunConfig) -> list[str]:
    result = _run_estimate(cfg)
    hr = home_range(result, cfg.coverage)
    write_homerange_csv(hr, result, cfg.out / "homerange.csv")
    write_homerange_summary_csv(hr, cfg.out / "homerange_summary.csv")
    _write_summary(
        cfg,
        {
            "node_count": result.lattice.node_count,
            "observation_count": result.assignment.n,
            "selected_k": result.k_used,
            "coverage_achieved": hr.achieved,
            "homerange_nodes": len(hr.node_ids),
            "homerange_area": hr.area,
        },
        result.warnings,
    )
    return result.warnings


def cmd_simulate(cfg: RunConfig) -> list[str]:
    sim_cfg = SimulationConfig(replicates=cfg.replicates, seed=cfg.seed)
    report = run_comparison(sim_cfg)
    write_ise_csv(report, cfg.out / "ise.csv")
    summary = format_summary(report)
    (cfg.out / "summary.txt").write_text(summary)
    _write_summary(
        cfg,
        {
            "mean_ise_lattice": report.mean_lattice,
            "mean_ise_kernel": report.mean_kernel,
            "t_statistic": report.t_statistic,
        },
        [],
    )
    sys.stdout.write(summary)
    return []


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latticedensity",
        description="Density and home-range estimation by random-walk diffusion "
        "on a lattice confined to a polygonal region.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, needs_region=True, needs_obs=False):
        if needs_region:
            p.add_argument("--region", required=True, help="region file (GeoJSON Polygon or ring CSV)")
            p.add_argument("--spacing", type=float, required=True, help="node spacing, coordinate units")
            p.add_argument("--rule", default="grid8", help="neighbor rule: grid8 or band:LO:HI")
            p.add_argument("--edits", default=None, help="edit script file")
        if needs_obs:
            p.add_argument("--obs", required=True, help="observations CSV (easting,northing)")
            p.add_argument("--mobility", type=float, default=0.5, help="move probability scale M in (0, 1]")
            p.add_argument("--k", default="auto", help="step count, or auto for cross-validation")
            p.add_argument("--kmax", type=int, default=1000, help="cross-validation scan limit")
            p.add_argument("--window", type=int, default=30, help="early-stop window for the scan")
            p.add_argument("--resolution", type=int, default=200, help="raster cells per axis")
        p.add_argument("--seed", type=int, default=None, help="random seed (recorded in the summary)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--strict", action="store_true", help="exit 1 when warnings occur")

    p = sub.add_parser("build-lattice", help="generate nodes and links inside a region")
    add_common(p, needs_region=True)

    p = sub.add_parser("estimate", help="full density estimation pipeline")
    add_common(p, needs_region=True, needs_obs=True)

    p = sub.add_parser("homerange", help="estimate, then extract a minimal home range")
    add_common(p, needs_region=True, needs_obs=True)
    p.add_argument("--coverage", type=float, default=0.95, help="home-range probability target P")

    p = sub.add_parser("simulate", help="estimator comparison on a normal target")
    p.add_argument("--replicates", type=int, default=20, help="number of simulated data sets")
    add_common(p, needs_region=False)

    return parser


_HANDLERS = {
    "build-lattice": cmd_build_lattice,
    "estimate": cmd_estimate,
    "homerange": cmd_homerange,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig.from_args(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        warnings = _HANDLERS[cfg.command](cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not cfg.seed_given:
        print(f"seed: {cfg.seed}", file=sys.stderr)
    if warnings and cfg.strict:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
