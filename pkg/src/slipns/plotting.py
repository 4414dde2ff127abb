"""Minimal SVG line plots (log-scaled y) with no plotting dependency."""

import math

from .errors import ConfigurationError

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_W, _H = 720, 460
_ML, _MR, _MT, _MB = 70, 20, 20, 50


def _ticks(lo, hi, count=6):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / max(count - 1, 1)))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= count:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-12 * span:
        out.append(v)
        v += step
    return out


def emit_plot(series, path, fits=None, title="", xlabel="t", ylabel="value"):
    """Write one SVG: log10(y) vs x, one polyline per series.

    series: list of (label, xs, ys); nonpositive y values are dropped
    from the log plot and counted in a footnote. fits: optional list of
    (label, DecayFit) pairs rendered as rate annotations.
    """
    if not series:
        raise ConfigurationError("emit_plot needs at least one series")
    cleaned = []
    dropped = 0
    for label, xs, ys in series:
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)]
        pos = [(x, y) for x, y in pts if y > 0]
        dropped += len(pts) - len(pos)
        if pos:
            cleaned.append((label, pos))
    if not cleaned:
        raise ConfigurationError("emit_plot: no positive values to draw")

    all_x = [x for _, pts in cleaned for x, _ in pts]
    all_ly = [math.log10(y) for _, pts in cleaned for _, y in pts]
    x0, x1 = min(all_x), max(all_x)
    y0, y1 = min(all_ly), max(all_ly)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(x):
        return _ML + (x - x0) / (x1 - x0) * (_W - _ML - _MR)

    def py(ly):
        return _H - _MB - (ly - y0) / (y1 - y0) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="#999"/>',
    ]
    for xt in _ticks(x0, x1):
        parts.append(
            f'<line x1="{px(xt):.1f}" y1="{_H - _MB}" x2="{px(xt):.1f}" '
            f'y2="{_H - _MB + 5}" stroke="#333"/>'
            f'<text x="{px(xt):.1f}" y="{_H - _MB + 18}" text-anchor="middle">{xt:g}</text>'
        )
    for yt in _ticks(y0, y1):
        parts.append(
            f'<line x1="{_ML - 5}" y1="{py(yt):.1f}" x2="{_ML}" y2="{py(yt):.1f}" stroke="#333"/>'
            f'<text x="{_ML - 8}" y="{py(yt):.1f}" text-anchor="end" '
            f'dominant-baseline="middle">1e{yt:g}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:.0f}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{(_MT + _H - _MB) / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.0f})">log10 {ylabel}</text>'
    )
    if title:
        parts.append(f'<text x="{_ML}" y="14" font-weight="bold">{title}</text>')

    fit_by_label = dict(fits) if fits else {}
    for i, (label, pts) in enumerate(cleaned):
        color = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{px(x):.2f},{py(math.log10(y)):.2f}" for x, y in pts)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = _MT + 16 + 16 * i
        legend = label
        fit = fit_by_label.get(label)
        if fit is not None:
            legend += f"  rate {fit.rate:.4g} (R2 {fit.r_squared:.4f})"
        parts.append(
            f'<line x1="{_W - _MR - 180}" y1="{ly - 4}" x2="{_W - _MR - 160}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
            f'<text x="{_W - _MR - 155}" y="{ly}">{legend}</text>'
        )
    if dropped:
        parts.append(
            f'<text x="{_ML}" y="{_H - 34}" fill="#666">'
            f"{dropped} nonpositive point(s) omitted from the log scale</text>"
        )
    parts.append("</svg>")

    text = "\n".join(parts)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path
