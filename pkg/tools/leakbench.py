#!/usr/bin/env python3
"""
leakbench: run covert-channel experiments on simulated cores and measure their capacity.

Usage:
    python tools/leakbench.py run --platform skylake --protocol bhb --policy none --samples 64
    python tools/leakbench.py run --manifest experiments.ini --out results
    python tools/leakbench.py table results --out results
    python tools/leakbench.py analyze results/skylake-bhb-none.csv
"""

import asyncio
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

TOOLS_DIR = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(os.path.dirname(TOOLS_DIR), "services"))
sys.path.insert(0, TOOLS_DIR)

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from capacity import analyze as analyze_samples
from capacity import average_curve, build_matrix
from capacity.report import CapacityReport
from capacity.shuffle import DEFAULT_TRIALS
from harness import ExperimentConfig, read_csv, run_experiment, symbol_rate, write_csv
from manifest import REPORT_FORMATS, RunManifest, load_manifest, parse_formats, parse_inputs
from microarch.platforms import load_platform
from plots import render_curve, render_heatmap
from protocols import ProtocolSpec
from shared.errors import ConfigError, LeakbenchError
from shared.logger import configure_logging, log
from summary import build_grid, format_cell, write_markdown

JOBS = int(os.getenv("LEAKBENCH_JOBS", str(min(4, os.cpu_count() or 1))))

app = typer.Typer(no_args_is_help=True, help="Intra-core covert channel bench")
console = Console()


@app.callback()
def main(
    log_level: str | None = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING, ..."),
    log_file: Path | None = typer.Option(None, "--log-file", help="Also write JSON-lines logs here"),
) -> None:
    if log_level or log_file:
        configure_logging(log_level, log_file)


@dataclass
class ExperimentOutcome:
    name: str
    files: list[Path] = field(default_factory=list)
    report: CapacityReport | None = None
    error: str | None = None


def execute(config: ExperimentConfig, out: Path, formats: tuple[str, ...], trials: int) -> ExperimentOutcome:
    """Run one experiment and write the requested artifacts into `out`."""
    outcome = ExperimentOutcome(name=config.name)
    platform = load_platform(config.platform)
    samples = run_experiment(config, platform)
    title = f"{samples.protocol} on {samples.platform}, policy {samples.policy}"

    if "csv" in formats:
        outcome.files.append(write_csv(samples, out / f"{config.name}.csv"))
    if "json" in formats:
        outcome.report = analyze_samples(samples, trials=trials, seed=config.seed, rate=symbol_rate(platform))
        path = out / f"{config.name}.json"
        path.write_bytes(outcome.report.to_json())
        outcome.files.append(path)
    if "heatmap" in formats:
        outcome.files.append(
            render_heatmap(
                build_matrix(samples),
                out / f"{config.name}.heatmap.tiff",
                title,
                sidecar=out / "meta" / f"{config.name}.heatmap.json",
            )
        )
    if "curve" in formats:
        outcome.files.append(
            render_curve(
                average_curve(samples),
                out / f"{config.name}.curve.tiff",
                title,
                sidecar=out / "meta" / f"{config.name}.curve.json",
            )
        )
    for path in outcome.files:
        log.log("REPORT", f"{config.name}: wrote {path}")
    return outcome


def execute_safely(config: ExperimentConfig, out: Path, formats: tuple[str, ...], trials: int) -> ExperimentOutcome:
    try:
        return execute(config, out, formats, trials)
    except LeakbenchError as e:
        log.error(f"{config.name}: {e}")
        return ExperimentOutcome(name=config.name, error=str(e))
    except Exception as e:
        log.exception(f"{config.name}: unexpected failure")
        return ExperimentOutcome(name=config.name, error=f"{type(e).__name__}: {e}")


async def run_manifest(manifest: RunManifest, trials: int, jobs: int = JOBS) -> list[ExperimentOutcome]:
    """Experiments run concurrently in worker threads, each with its own state and seed."""
    manifest.out.mkdir(parents=True, exist_ok=True)
    gate = asyncio.Semaphore(max(1, jobs))

    async def one(config: ExperimentConfig) -> ExperimentOutcome:
        async with gate:
            return await asyncio.to_thread(execute_safely, config, manifest.out, manifest.formats, trials)

    return await asyncio.gather(*(one(c) for c in manifest.experiments))


def _single_manifest(
    platform: str | None,
    protocol: str | None,
    policy: str,
    samples: int,
    seed: int,
    noise: float | None,
    inputs: str | None,
    name: str | None,
    out: Path | None,
    formats: tuple[str, ...],
) -> RunManifest:
    if platform is None or protocol is None:
        raise ConfigError("either --manifest or both --platform and --protocol are required")
    try:
        spec = ProtocolSpec(name=protocol, inputs=parse_inputs(inputs) if inputs else None)
        config = ExperimentConfig(
            name=name or f"{platform}-{protocol}-{policy.replace(',', '+')}",
            platform=platform,
            protocol=spec,
            policy=policy,
            samples_per_symbol=samples,
            seed=seed,
            noise_stddev=noise,
        )
        return RunManifest(experiments=(config,), out=out or Path("results"), formats=formats)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


@app.command()
def run(
    platform: str | None = typer.Option(None, "--platform", help="Built-in profile name or profile file"),
    protocol: str | None = typer.Option(None, "--protocol", help="l1d, l1i, tlb, bhb or btb"),
    policy: str = typer.Option("none", "--policy", help="none, full or a comma list of actions"),
    samples: int = typer.Option(16, "--samples", help="Samples per input symbol"),
    seed: int = typer.Option(0, "--seed", envvar="LEAKBENCH_SEED", help="Experiment seed"),
    out: Path | None = typer.Option(None, "--out", help="Output directory (default: results, or the manifest's out)"),
    formats: str | None = typer.Option(
        None, "--format", help="Comma list of csv, json, heatmap, curve (default: all, or the manifest's format)"
    ),
    manifest: Path | None = typer.Option(None, "--manifest", help="Manifest file with one section per experiment"),
    noise: float | None = typer.Option(None, "--noise", help="Override the profile's latency noise (cycles)"),
    inputs: str | None = typer.Option(None, "--inputs", help="Input subset, e.g. 0,1 or 32-48"),
    trials: int = typer.Option(DEFAULT_TRIALS, "--trials", help="Shuffle trials for C0"),
    name: str | None = typer.Option(None, "--name", help="Experiment name (single-experiment runs)"),
    jobs: int = typer.Option(JOBS, "--jobs", help="Experiments run at once"),
) -> None:
    """Run experiments and write samples, reports and figures."""
    try:
        fmt = parse_formats(formats) if formats is not None else None
        if manifest is not None:
            plan = load_manifest(manifest, out=out)
            plan = plan.model_copy(update={"formats": fmt}) if fmt is not None else plan
        else:
            plan = _single_manifest(platform, protocol, policy, samples, seed, noise, inputs, name, out, fmt or REPORT_FORMATS)
    except LeakbenchError as e:
        log.error(str(e))
        raise typer.Exit(2) from None

    outcomes = asyncio.run(run_manifest(plan, trials, jobs))
    failed = [o for o in outcomes if o.error]
    for o in outcomes:
        if o.report is not None:
            r = o.report
            bw = f", {r.bandwidth_bps:,.1f} b/s" if r.bandwidth_bps is not None else ""
            console.print(f"{o.name}: C={r.capacity_bits:.4f} b, C0={r.c0_bits:.4f} b, {r.verdict}{bw}")
    if failed:
        console.print(f"[red]{len(failed)} of {len(outcomes)} experiments failed:[/red]")
        for o in failed:
            console.print(f"  {o.name}: {o.error}")
        raise typer.Exit(1)


def load_reports(paths: list[Path]) -> list[CapacityReport]:
    files: list[Path] = []
    for path in paths:
        files.extend(sorted(path.glob("*.json")) if path.is_dir() else [path])
    reports = []
    for path in files:
        try:
            reports.append(CapacityReport.model_validate_json(path.read_bytes()))
        except (OSError, ValidationError) as e:
            raise ConfigError(f"{path}: not a capacity report ({e})") from e
    return reports


def render_table(reports: list[CapacityReport]) -> Table:
    grid = build_grid(reports)
    table = Table(title="C / C0 (bits per symbol)")
    table.add_column("Channel")
    table.add_column("Policy")
    for platform in grid.platforms:
        table.add_column(platform, justify="right")
    for protocol, policy in grid.rows:
        cells = []
        for platform in grid.platforms:
            report = grid.cell(protocol, policy, platform)
            text = format_cell(report, markdown=False)
            cells.append(f"[bold red]{text}[/bold red]" if report and report.verdict == "channel_present" else text)
        table.add_row(protocol, policy, *cells)
    return table


@app.command()
def table(
    paths: list[Path] = typer.Argument(None, help="Report JSON files or directories holding them"),
    out: Path = typer.Option(Path("results"), "--out", help="Directory for summary.md"),
) -> None:
    """Summarise capacity reports as a channel x policy grid."""
    try:
        reports = load_reports(paths or [])
    except LeakbenchError as e:
        log.error(str(e))
        raise typer.Exit(1) from None
    console.print(render_table(reports))
    path = write_markdown(build_grid(reports), out / "summary.md")
    log.log("REPORT", f"wrote {path}")


@app.command("analyze")
def analyze_cmd(
    csv: Path = typer.Argument(..., help="Sample CSV (harness output or external trace)"),
    trials: int = typer.Option(DEFAULT_TRIALS, "--trials", help="Shuffle trials for C0"),
    seed: int | None = typer.Option(None, "--seed", help="Shuffle seed (default: the CSV's seed)"),
    rate: float | None = typer.Option(None, "--rate", help="Symbols per second (default: from the CSV's platform)"),
    out: Path | None = typer.Option(None, "--out", help="Write the report here instead of stdout"),
) -> None:
    """Compute a capacity report from a sample CSV."""
    try:
        samples = read_csv(csv)
        if rate is None and samples.platform:
            try:
                rate = symbol_rate(load_platform(samples.platform))
            except ConfigError:
                log.warning(f"unknown platform {samples.platform!r}; bandwidth not computed")
        report = analyze_samples(samples, trials=trials, seed=seed, rate=rate)
    except LeakbenchError as e:
        log.error(str(e))
        raise typer.Exit(1) from None

    if out is None:
        sys.stdout.write(report.to_json().decode() + "\n")
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(report.to_json())
        log.log("REPORT", f"wrote {out}")


if __name__ == "__main__":
    app()
