"""Number formatting and the plain-text table / chart builders every report section uses."""

from decimal import ROUND_DOWN, Decimal
from typing import List, Sequence, Tuple
from xml.sax.saxutils import escape

import pandas as pd


def fmt_proportion(value: float) -> str:
    return f"{value:.2f}"


def fmt_percent(value: float) -> str:
    return f"{value * 100:.2f}%"


def fmt_score(value: float, places: int = 3) -> str:
    """Scores are cut, not rounded, to `places` decimals (0.2176 -> "0.217")."""
    # rounding at 9 places first keeps 0.25999999999999995 from becoming 0.259
    exact = Decimal(repr(round(value, 9)))
    return str(exact.quantize(Decimal(1).scaleb(-places), rounding=ROUND_DOWN))


def fmt_signed(value: int) -> str:
    return f"{value:+d}" if value > 0 else str(value)


def markdown_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Pipe table: first column left-aligned, the rest right-aligned. Cells are printed as given."""
    frame = pd.DataFrame([list(row) for row in rows], columns=list(headers), dtype=str)
    align = ("left",) + ("right",) * (len(headers) - 1)
    return frame.to_markdown(index=False, tablefmt="pipe", colalign=align, disable_numparse=True) + "\n"


def csv_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    return pd.DataFrame([list(row) for row in rows], columns=list(headers), dtype=str).to_csv(
        index=False, lineterminator="\n"
    )


PALETTE = ["#1d4ed8", "#059669", "#d97706", "#dc2626", "#7c3aed", "#0891b2"]


def svg_grouped_bars(
    title: str,
    categories: Sequence[str],
    series: Sequence[Tuple[str, Sequence[float]]],
    width: int = 640,
    height: int = 360,
) -> str:
    """
    Vertical grouped bar chart of proportions (0-1), one cluster per category
    and one bar per series, with a legend.
    """
    ml, mr, mt, mb = 56, 150, 44, 40
    cw, ch = width - ml - mr, height - mt - mb
    cluster = cw / max(1, len(categories))
    bar = cluster * 0.8 / max(1, len(series))

    parts: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml}" y="24" font-size="14" font-weight="bold" fill="#1e293b">{escape(title)}</text>',
    ]
    for tick in range(0, 101, 20):
        y = mt + ch - ch * tick / 100
        parts.append(f'<line x1="{ml}" y1="{y:.1f}" x2="{ml + cw}" y2="{y:.1f}" stroke="#e2e8f0" stroke-width="1"/>')
        parts.append(
            f'<text x="{ml - 6}" y="{y + 4:.1f}" font-size="10" text-anchor="end" fill="#64748b">{tick}%</text>'
        )
    for c, category in enumerate(categories):
        x0 = ml + c * cluster + cluster * 0.1
        for s, (_, values) in enumerate(series):
            value = values[c]
            h = ch * value
            x = x0 + s * bar
            parts.append(
                f'<rect x="{x:.1f}" y="{mt + ch - h:.1f}" width="{bar:.1f}" height="{h:.1f}" '
                f'fill="{PALETTE[s % len(PALETTE)]}"><title>{escape(series[s][0])} {escape(category)}: '
                f"{fmt_percent(value)}</title></rect>"
            )
        parts.append(
            f'<text x="{ml + c * cluster + cluster / 2:.1f}" y="{mt + ch + 18}" font-size="11" '
            f'text-anchor="middle" fill="#334155">{escape(category)}</text>'
        )
    for s, (name, _) in enumerate(series):
        y = mt + 8 + s * 18
        parts.append(f'<rect x="{ml + cw + 16}" y="{y}" width="12" height="12" fill="{PALETTE[s % len(PALETTE)]}"/>')
        parts.append(f'<text x="{ml + cw + 34}" y="{y + 10}" font-size="11" fill="#334155">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
