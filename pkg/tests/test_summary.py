from datetime import datetime, timezone
from pathlib import Path

import pytest

from capacity.report import CapacityReport
from shared.errors import ConfigError
from summary import build_grid, format_cell, generate_markdown, write_markdown

FIXTURES = Path(__file__).parent / "fixtures"
STAMP = datetime(2026, 1, 2, 3, 4, 5, tzinfo=timezone.utc)


def report(protocol: str, policy: str, platform: str, c: float, c0: float, rate: float | None = 500.0) -> CapacityReport:
    present = c > c0
    return CapacityReport(
        protocol=protocol,
        platform=platform,
        policy=policy,
        seed=0,
        samples=100,
        inputs=2,
        bins=2,
        capacity_bits=c,
        c0_bits=c0,
        trials=100,
        verdict="channel_present" if present else "inconclusive",
        residual_lower_bound=max(0.0, c - c0),
        symbol_rate=rate,
        bandwidth_bps=c * rate if rate else None,
        iterations=1,
        input_distribution=[0.5, 0.5],
    )


def _reports() -> list[CapacityReport]:
    out = []
    for platform in ("a9", "skylake"):
        for protocol in ("btb", "l1d", "l1i", "tlb", "bhb"):
            out.append(report(protocol, "none", platform, 2.0, 0.1))
    return out


def test_grid_orders_rows_and_columns():
    grid = build_grid(_reports() + [report("l1i", "full", "a9", 0.7, 0.38, rate=250.0)])
    assert grid.populated == 11
    assert grid.platforms == ["skylake", "a9"]
    assert grid.rows[:3] == [("l1d", "none"), ("l1i", "none"), ("l1i", "full")]
    assert grid.rows[-1] == ("btb", "none")
    assert grid.cell("tlb", "full", "a9") is None


def test_duplicate_cell():
    with pytest.raises(ConfigError):
        build_grid([report("l1d", "none", "a9", 1, 0), report("l1d", "none", "a9", 1, 0)])


def test_format_cell():
    assert format_cell(report("bhb", "full", "a9", 0.009, 0.02)) == "0.009 / 0.020"
    assert format_cell(report("bhb", "full", "skylake", 1.0, 0.2)) == "**1.000 / 0.200**"
    assert format_cell(report("bhb", "full", "skylake", 1.0, 0.2), markdown=False) == "1.000 / 0.200 *"
    assert format_cell(None) == ""


def test_markdown_lists_residual_channels():
    grid = build_grid([report("l1i", "full", "a9", 0.7, 0.38, rate=250.0), report("l1d", "full", "a9", 0.01, 0.02)])
    text = generate_markdown(grid, STAMP)
    assert "Generated 2026-01-02 03:04:05 UTC" in text
    assert "| Channel | Policy | a9 |" in text
    assert "| l1i | full | **0.700 / 0.380** |" in text
    assert "| l1d | full | 0.010 / 0.020 |" in text
    assert "- **l1i** on a9 (full): at least 0.320 b, >= 80 b/s" in text


def test_empty_grid():
    text = generate_markdown(build_grid([]), STAMP)
    assert "_No reports._" in text
    assert "|" not in text


def test_write_markdown(tmp_path):
    path = write_markdown(build_grid(_reports()), tmp_path / "sub" / "summary.md")
    assert path.read_text().startswith("# Channel capacity summary")


def test_mitigated_a9_instruction_cache_reference_point():
    ref = CapacityReport.model_validate_json((FIXTURES / "a9_l1i_full.json").read_bytes())
    assert ref.bandwidth_bps == pytest.approx(ref.capacity_bits * ref.symbol_rate)
    assert ref.residual_lower_bound == pytest.approx(ref.capacity_bits - ref.c0_bits)
    text = generate_markdown(build_grid([ref]), STAMP)
    assert "| l1i | full | **0.700 / 0.380** |" in text
    assert "- **l1i** on a9 (full): at least 0.320 b, >= 80 b/s" in text
