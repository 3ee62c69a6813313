"""Minimal self-contained SVG line charts (no plotting dependency).

One public function, line_chart.  Series are dicts with "label", "x", "y";
NaN/inf points are dropped from the polyline but keep their slot so lines
break there instead of bridging the hole.
"""

import math

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#17becf", "#7f7f7f"]


def _nice_ticks(lo, hi, n=5):
    """Round tick positions covering [lo, hi], at most ~n of them."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = 0.0, 1.0
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    raw = span / max(n, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        step = mult * mag
        if span / step <= n + 0.5:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return ticks


def _fmt_tick(v):
    if v == int(v) and abs(v) < 1e6:
        return str(int(v))
    return "%.3g" % v


def _esc(s):
    return (str(s).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


def line_chart(path, series, title="", xlabel="", ylabel="",
               width=640, height=440, y_range=None):
    """Write a multi-series line chart with markers and a legend to `path`."""
    ml, mr, mt, mb = 62, 16, 34, 46
    pw, ph = width - ml - mr, height - mt - mb

    xs = [v for s in series for v in s["x"] if math.isfinite(v)]
    ys = [v for s in series for v in s["y"] if math.isfinite(v)]
    x_lo, x_hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if y_range is not None:
        y_lo, y_hi = y_range
    else:
        y_lo, y_hi = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.04 * (y_hi - y_lo)
    if y_range is None:
        y_lo, y_hi = y_lo - pad, y_hi + pad

    def X(v):
        return ml + (v - x_lo) / (x_hi - x_lo) * pw

    def Y(v):
        return mt + ph - (v - y_lo) / (y_hi - y_lo) * ph

    out = []
    out.append('<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
               'viewBox="0 0 %d %d" font-family="sans-serif" font-size="12">'
               % (width, height, width, height))
    out.append('<rect width="%d" height="%d" fill="white"/>' % (width, height))

    for t in _nice_ticks(x_lo, x_hi):
        x = X(t)
        out.append('<line x1="%.2f" y1="%d" x2="%.2f" y2="%d" '
                   'stroke="#dddddd"/>' % (x, mt, x, mt + ph))
        out.append('<text x="%.2f" y="%d" text-anchor="middle">%s</text>'
                   % (x, mt + ph + 18, _fmt_tick(t)))
    for t in _nice_ticks(y_lo, y_hi):
        y = Y(t)
        out.append('<line x1="%d" y1="%.2f" x2="%d" y2="%.2f" '
                   'stroke="#dddddd"/>' % (ml, y, ml + pw, y))
        out.append('<text x="%d" y="%.2f" text-anchor="end" '
                   'dominant-baseline="middle">%s</text>'
                   % (ml - 8, y, _fmt_tick(t)))
    out.append('<rect x="%d" y="%d" width="%d" height="%d" fill="none" '
               'stroke="#333333"/>' % (ml, mt, pw, ph))

    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        run = []
        segs = []
        for xv, yv in zip(s["x"], s["y"]):
            if math.isfinite(xv) and math.isfinite(yv):
                run.append((X(xv), Y(yv)))
            elif run:
                segs.append(run)
                run = []
        if run:
            segs.append(run)
        for seg in segs:
            pts = " ".join("%.2f,%.2f" % q for q in seg)
            out.append('<polyline points="%s" fill="none" stroke="%s" '
                       'stroke-width="1.8"/>' % (pts, color))
            for qx, qy in seg:
                out.append('<circle cx="%.2f" cy="%.2f" r="3" fill="%s"/>'
                           % (qx, qy, color))

    ly = mt + 10
    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        out.append('<line x1="%d" y1="%.2f" x2="%d" y2="%.2f" stroke="%s" '
                   'stroke-width="1.8"/>' % (ml + 10, ly, ml + 30, ly, color))
        out.append('<text x="%d" y="%.2f" dominant-baseline="middle">%s</text>'
                   % (ml + 36, ly, _esc(s["label"])))
        ly += 16

    if title:
        out.append('<text x="%.1f" y="20" text-anchor="middle" '
                   'font-size="14">%s</text>' % (ml + pw / 2, _esc(title)))
    if xlabel:
        out.append('<text x="%.1f" y="%d" text-anchor="middle">%s</text>'
                   % (ml + pw / 2, height - 8, _esc(xlabel)))
    if ylabel:
        out.append('<text x="14" y="%.1f" text-anchor="middle" '
                   'transform="rotate(-90 14 %.1f)">%s</text>'
                   % (mt + ph / 2, mt + ph / 2, _esc(ylabel)))
    out.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")
