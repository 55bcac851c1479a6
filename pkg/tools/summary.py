"""
Capacity summary grid: one row per channel and policy, one column per platform.

Each cell shows `C / C0` in bits; cells where C > C0 are flagged.
"""

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from capacity.report import CapacityReport
from microarch.platforms import BUILTIN_PLATFORMS
from shared.errors import ConfigError

CHANNEL_ORDER = ("l1d", "l1i", "tlb", "bhb", "btb")
POLICY_ORDER = ("none", "full")


@dataclass
class SummaryGrid:
    platforms: list[str] = field(default_factory=list)
    rows: list[tuple[str, str]] = field(default_factory=list)
    cells: dict[tuple[str, str, str], CapacityReport] = field(default_factory=dict)

    @property
    def populated(self) -> int:
        return len(self.cells)

    def cell(self, protocol: str, policy: str, platform: str) -> CapacityReport | None:
        return self.cells.get((protocol, policy, platform))


def _rank(value: str, order: tuple[str, ...]) -> tuple[int, str]:
    return (order.index(value), "") if value in order else (len(order), value)


def build_grid(reports: list[CapacityReport]) -> SummaryGrid:
    grid = SummaryGrid()
    for r in reports:
        key = (r.protocol, r.policy or "none", r.platform or "external")
        if key in grid.cells:
            raise ConfigError(f"two reports for {'/'.join(key)}")
        grid.cells[key] = r
    grid.platforms = sorted({k[2] for k in grid.cells}, key=lambda p: _rank(p, BUILTIN_PLATFORMS))
    grid.rows = sorted(
        {(k[0], k[1]) for k in grid.cells},
        key=lambda row: (_rank(row[0], CHANNEL_ORDER), _rank(row[1], POLICY_ORDER)),
    )
    return grid


def format_cell(report: CapacityReport | None, markdown: bool = True) -> str:
    if report is None:
        return ""
    text = f"{report.capacity_bits:.3f} / {report.c0_bits:.3f}"
    if report.verdict == "channel_present":
        return f"**{text}**" if markdown else f"{text} *"
    return text


def generate_markdown(grid: SummaryGrid, generated_at: datetime | None = None) -> str:
    generated_at = generated_at or datetime.now(timezone.utc)
    lines = [
        "# Channel capacity summary",
        "",
        f"Generated {generated_at.strftime('%Y-%m-%d %H:%M:%S UTC')}. Cells are `C / C0` in bits per symbol;",
        "bold cells have C > C0 (channel present).",
        "",
    ]
    if not grid.cells:
        lines.append("_No reports._")
        return "\n".join(lines) + "\n"

    lines.append("| Channel | Policy | " + " | ".join(grid.platforms) + " |")
    lines.append("|---------|--------|" + "|".join("-" * (len(p) + 2) for p in grid.platforms) + "|")
    for protocol, policy in grid.rows:
        cells = [format_cell(grid.cell(protocol, policy, p)) for p in grid.platforms]
        lines.append(f"| {protocol} | {policy} | " + " | ".join(cells) + " |")

    present = [r for r in grid.cells.values() if r.verdict == "channel_present"]
    lines.extend(["", "## Residual channels", ""])
    if not present:
        lines.append("- none")
    for r in sorted(present, key=lambda r: (r.protocol, r.platform or "", r.policy or "")):
        bw = f", >= {r.residual_lower_bound * r.symbol_rate:,.0f} b/s" if r.symbol_rate else ""
        lines.append(
            f"- **{r.protocol}** on {r.platform} ({r.policy}): at least {r.residual_lower_bound:.3f} b{bw}"
        )
    return "\n".join(lines) + "\n"


def write_markdown(grid: SummaryGrid, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(generate_markdown(grid))
    return path
