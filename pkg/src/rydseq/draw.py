"""Timeline rendering: a plain-text slot listing and an SVG with one track per channel."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .sequence import Sequence

__all__ = ["render_text", "render_svg", "describe_waveform"]


def _num(x: float) -> str:
    return f"{x:.6g}"


def describe_waveform(wf) -> str:
    p = wf.params
    if wf.kind == "constant":
        return _num(p["value"])
    if wf.kind == "ramp":
        return f"Ramp({_num(p['start'])}->{_num(p['stop'])})"
    if wf.kind == "blackman":
        return f"Blackman(area={_num(p['area'])})"
    return f"Arbitrary({wf.duration} samples)"


def render_text(seq: Sequence) -> str:
    """Every slot of every channel with its start and end times in ns."""
    data = seq.draw_data()
    order = seq.register.index
    lines = [
        f"Sequence on {seq.device.name}: {len(seq.register)} atoms, {data['duration']} ns"
    ]
    for ch_name in seq.declared_channels:
        spec = seq.declared_channels[ch_name]
        lines.append(f"Channel {ch_name} ({spec.id}, {spec.addressing}, {spec.basis})")
        for s in seq.slots(ch_name):
            who = ", ".join(sorted(s.targets, key=order))
            span = f"  {s.start:>7} -> {s.end:<7}"
            if s.kind == "pulse":
                p = s.pulse
                lines.append(
                    f"{span} Pulse amp={describe_waveform(p.amplitude)} "
                    f"det={describe_waveform(p.detuning)} phase={_num(p.phase)} on {who}"
                )
            elif s.kind == "target":
                lines.append(f"{span} Target {who}")
            else:
                lines.append(f"{span} Delay")
    lines.append(f"Measurement: {data['measurement'] or 'none'}")
    return "\n".join(lines) + "\n"


def _polyline(t: np.ndarray, y: np.ndarray, x0, y0, sx, sy, color: str) -> str:
    pts = " ".join(f"{x0 + a * sx:.2f},{y0 - b * sy:.2f}" for a, b in zip(t, y))
    return f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'


def render_svg(seq: Sequence, width: int = 900, track_height: int = 120) -> str:
    """Amplitude (solid) and detuning (dashed) per channel, target labels at each
    retarget, and the measurement basis on the right."""
    data = seq.draw_data()
    T = max(data["duration"], 1)
    chans = data["channels"]
    left, right, top = 150, 110, 30
    plot_w = width - left - right
    height = top + track_height * max(len(chans), 1) + 20
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<text x="{left}" y="18">{escape(seq.device.name)}: {data["duration"]} ns</text>',
    ]
    sx = plot_w / T
    for row, ch in enumerate(chans):
        y_base = top + track_height * (row + 1) - 25
        amp = np.zeros(data["duration"])
        det = np.zeros(data["duration"])
        for s in ch["slots"]:
            if s["kind"] == "pulse":
                amp[s["start"] : s["end"]] = s["amplitude"]
                det[s["start"] : s["end"]] = s["detuning"]
        scale = max(np.max(np.abs(amp), initial=0), np.max(np.abs(det), initial=0), 1e-12)
        sy = (track_height - 50) / scale / 2
        mid = y_base - (track_height - 50) / 2
        out.append(
            f'<g class="track" data-channel="{escape(ch["name"])}" data-basis="{ch["basis"]}">'
        )
        out.append(
            f'<text x="8" y="{mid:.2f}">{escape(ch["name"])}</text>'
            f'<text x="8" y="{mid + 14:.2f}" fill="#666">{escape(ch["channel_id"])}</text>'
        )
        out.append(
            f'<line x1="{left}" y1="{mid:.2f}" x2="{left + plot_w}" y2="{mid:.2f}" stroke="#ccc"/>'
        )
        if data["duration"]:
            t = np.append(np.arange(data["duration"]), data["duration"])
            out.append(
                _polyline(t, np.append(amp, 0.0), left, mid, sx, sy, "#1f77b4").replace(
                    "<polyline", '<polyline class="amplitude"'
                )
            )
            out.append(
                _polyline(t, np.append(det, 0.0), left, mid, sx, sy, "#2ca02c")
                .replace("<polyline", '<polyline class="detuning" stroke-dasharray="4 2"')
            )
        for s in ch["slots"]:
            if s["kind"] == "target":
                x = left + s["start"] * sx
                label = escape(", ".join(s["targets"]))
                out.append(
                    f'<rect x="{x:.2f}" y="{y_base - track_height + 32:.2f}" width="{max(len(label), 1) * 7 + 6}" '
                    f'height="15" fill="#ffd8a8" stroke="#e8590c"/>'
                    f'<text class="target" x="{x + 3:.2f}" y="{y_base - track_height + 43:.2f}">{label}</text>'
                )
        out.append("</g>")
    if data["measurement"]:
        out.append(
            f'<rect x="{left + plot_w + 10}" y="{top}" width="{right - 20}" height="20" '
            f'fill="#d0ebff" stroke="#1c7ed6"/>'
            f'<text class="measurement" x="{left + plot_w + 14}" y="{top + 14}">{data["measurement"]}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
