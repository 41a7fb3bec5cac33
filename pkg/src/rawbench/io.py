"""LRS1 raw container, PNG/PPM image files and benchmark report rendering."""

from __future__ import annotations

import csv
import io
import json
import math
import re
import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import png

from .bench import LONG_EXPOSURE_S, MetricRow, ScenePair, pair_gamma_hat
from .core import CameraProfile, QuantizedImage, SensorFrame
from .noise import derive_short_exposure
from .pipeline import calibrate, decalibrate, dequantize

MAGIC = b"LRS1"
_HEADER_FIELDS = ("width", "height", "channels", "bit_depth", "pattern", "role", "profile",
                  "exposure_time_s", "gamma")


class ContainerError(ValueError):
    pass


# -- LRS1 container -----------------------------------------------------------

def write_container(path, samples: np.ndarray, *, bit_depth: int = 16, pattern: str = "RGGB",
                    role: str = "", profile: dict | None = None, exposure_time_s: float | None = None,
                    gamma: float | None = None) -> None:
    """Write ``samples`` (h, w) or (h, w, c) as little-endian uint16 with a JSON header."""
    arr = np.asarray(samples)
    if arr.ndim == 2:
        arr = arr[..., None]
    if arr.ndim != 3:
        raise ContainerError("samples must be 2-D or 3-D")
    if not 1 <= bit_depth <= 16:
        raise ContainerError("bit_depth must be within 1..16")
    if arr.size and (arr.min() < 0 or arr.max() > 2**bit_depth - 1):
        raise ContainerError(f"samples exceed {bit_depth}-bit range")
    h, w, c = arr.shape
    header = {
        "width": w, "height": h, "channels": c, "bit_depth": bit_depth, "pattern": pattern,
        "role": role, "profile": profile, "exposure_time_s": exposure_time_s, "gamma": gamma,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = arr.astype("<u2").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<I", len(blob)) + blob + payload)


def read_container(path) -> tuple[np.ndarray, dict]:
    """Return ``(samples, header)``; samples are (h, w) for single-channel files."""
    data = Path(path).read_bytes()
    if len(data) < 8 or data[:4] != MAGIC:
        raise ContainerError("bad magic")
    (hlen,) = struct.unpack("<I", data[4:8])
    if 8 + hlen > len(data):
        raise ContainerError("truncated header")
    try:
        header = json.loads(data[8:8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerError(f"malformed header: {exc}") from None
    missing = [k for k in _HEADER_FIELDS if k not in header]
    if missing:
        raise ContainerError(f"header missing fields {missing}")
    h, w, c = header["height"], header["width"], header["channels"]
    payload = data[8 + hlen:]
    if len(payload) != 2 * h * w * c:
        raise ContainerError("payload size mismatch")
    samples = np.frombuffer(payload, dtype="<u2").reshape(h, w, c).astype(np.uint16)
    return (samples[..., 0] if c == 1 else samples), header


# -- PNG / PPM ----------------------------------------------------------------

def write_image(path, codes: np.ndarray, fmt: str | None = None) -> None:
    """Write (h, w, 3) integer codes as PNG-8, PNG-16 or PPM-16."""
    codes = np.asarray(codes)
    fmt = (fmt or _format_from_suffix(path, codes)).upper()
    h, w = codes.shape[:2]
    if fmt in ("PNG-8", "PNG-16"):
        depth = 8 if fmt == "PNG-8" else 16
        if codes.max(initial=0) > 2**depth - 1:
            raise ValueError(f"codes exceed {depth}-bit range")
        writer = png.Writer(w, h, greyscale=False, bitdepth=depth)
        with open(path, "wb") as fh:
            writer.write(fh, codes.reshape(h, w * 3).astype(np.uint16 if depth == 16 else np.uint8))
    elif fmt == "PPM-16":
        with open(path, "wb") as fh:
            fh.write(ppm_header(w, h))
            fh.write(codes.astype(">u2").tobytes(order="C"))
    else:
        raise ValueError(f"unknown image format {fmt!r}")


def _format_from_suffix(path, codes) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".ppm":
        return "PPM-16"
    return "PNG-16" if codes.dtype == np.uint16 or codes.max(initial=0) > 255 else "PNG-8"


def ppm_header(width: int, height: int) -> bytes:
    return f"P6\n{width} {height}\n65535\n".encode("ascii")


def read_image(path) -> tuple[np.ndarray, int]:
    """Read a PNG, PPM or 3-channel LRS1 file into ``(codes, bit_depth)``."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        samples, header = read_container(path)
        if samples.ndim != 3 or samples.shape[2] != 3:
            raise ValueError("container is not an RGB image")
        return samples, header["bit_depth"]
    if head[:2] == b"P6":
        return _read_ppm(path)
    w, h, rows, info = png.Reader(filename=str(path)).asDirect()
    planes = info["planes"]
    arr = np.vstack([np.asarray(r, dtype=np.uint16) for r in rows]).reshape(h, w, planes)
    if planes != 3:
        raise ValueError("only RGB images are supported")
    return arr, info["bitdepth"]


def _read_ppm(path) -> tuple[np.ndarray, int]:
    data = Path(path).read_bytes()
    m = re.match(rb"P6\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if not m:
        raise ValueError("malformed PPM header")
    w, h, maxval = (int(g) for g in m.groups())
    dtype = ">u2" if maxval > 255 else "u1"
    body = data[m.end():]
    arr = np.frombuffer(body, dtype=dtype, count=w * h * 3).reshape(h, w, 3)
    return arr.astype(np.uint16), 16 if maxval > 255 else 8


# -- reports ------------------------------------------------------------------

@dataclass
class ReportDocument:
    rows: list[MetricRow]
    aggregates: "OrderedDict[tuple[str, str], tuple[float, float, int]]" = field(default_factory=OrderedDict)

    def __post_init__(self):
        if not self.aggregates:
            self.aggregates = aggregate(self.rows)


def aggregate(rows) -> "OrderedDict[tuple[str, str], tuple[float, float, int]]":
    """Mean PSNR/SSIM per (variant, enhancer) over rows that scored; first-seen order."""
    groups: "OrderedDict[tuple[str, str], list[MetricRow]]" = OrderedDict()
    for r in rows:
        groups.setdefault((r.variant, r.enhancer), [])
        if r.ok and not math.isnan(r.psnr):
            groups[(r.variant, r.enhancer)].append(r)
    out = OrderedDict()
    for key, members in groups.items():
        if members:
            out[key] = (sum(m.psnr for m in members) / len(members),
                        sum(m.ssim for m in members) / len(members), len(members))
        else:
            out[key] = (math.nan, math.nan, 0)
    return out


def _fmt(x: float) -> str:
    return "nan" if x is None or math.isnan(x) else f"{x:.4f}"


def emit_report(doc: ReportDocument, fmt: str = "csv") -> str:
    if not doc.rows:
        raise ValueError("empty report")
    fmt = fmt.lower()
    if fmt == "csv":
        lines = ["scene,variant,enhancer,psnr_db,ssim"]
        lines += [f"{r.scene},{r.variant},{r.enhancer},{_fmt(r.psnr)},{_fmt(r.ssim)}" for r in doc.rows]
        return "\n".join(lines) + "\n"
    if fmt in ("md", "markdown"):
        return _markdown(doc)
    if fmt in ("plot", "plotdata"):
        return _plot_data(doc)
    raise ValueError(f"unknown report format {fmt!r}")


def _markdown(doc: ReportDocument) -> str:
    header = ["Variant", "Enhancer", "PSNR (dB)", "SSIM", "N"]
    body = []
    by_variant: "OrderedDict[str, list]" = OrderedDict()
    for (variant, enhancer), stats in doc.aggregates.items():
        by_variant.setdefault(variant, []).append((enhancer, stats))
    for variant, entries in by_variant.items():
        for enhancer, (p, s, n) in entries:
            body.append([variant, enhancer, _fmt(p), _fmt(s), str(n)])
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]

    def line(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

    out = [line(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    out += [line(r) for r in body]
    return "\n".join(out) + "\n"


def _plot_data(doc: ReportDocument) -> str:
    """Per (variant, enhancer) series of (gamma, mean PSNR), as JSON."""
    acc: "OrderedDict[tuple[str, str], OrderedDict[float, list[float]]]" = OrderedDict()
    for r in doc.rows:
        if not r.ok or r.gamma is None or math.isnan(r.psnr):
            continue
        acc.setdefault((r.variant, r.enhancer), OrderedDict()).setdefault(r.gamma, []).append(r.psnr)
    series = []
    for (variant, enhancer), by_gamma in acc.items():
        points = [[g, round(sum(v) / len(v), 4)] for g, v in sorted(by_gamma.items())]
        series.append({"variant": variant, "enhancer": enhancer, "points": points})
    return json.dumps({"x": "gamma", "y": "mean_psnr_db", "series": series}, indent=1) + "\n"


_GAMMA_IN_ID = re.compile(r"-g([0-9.]+)$")


def read_report_csv(text: str) -> list[MetricRow]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != ["scene", "variant", "enhancer", "psnr_db", "ssim"]:
        raise ValueError("not a benchmark report CSV")
    rows = []
    for rec in reader:
        m = _GAMMA_IN_ID.search(rec["scene"])
        p, s = float(rec["psnr_db"]), float(rec["ssim"])
        rows.append(MetricRow(rec["scene"], rec["variant"], rec["enhancer"], p, s,
                              float(m.group(1)) if m else None,
                              None if not math.isnan(p) else "error"))
    return rows


# -- datasets -----------------------------------------------------------------

MANIFEST = "manifest.json"


def save_dataset(pairs, out_dir, seed: int = 0) -> list[Path]:
    """Write each pair as short/long LRS1 frames plus a 16-bit PNG ground truth."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries, written = [], []
    for pair in pairs:
        prof = pair.profile
        t_long = LONG_EXPOSURE_S
        t_short = t_long / pair.gamma
        names = {k: f"{pair.scene_id}_{k}" + (".png" if k == "gt" else ".lrs") for k in ("short", "long", "gt")}
        for role, img, t in (("short", pair.y_short, t_short), ("long", pair.x_long, t_long)):
            frame = decalibrate(img, prof)
            write_container(out / names[role], frame.samples, bit_depth=frame.bit_depth, role=role,
                            profile=prof.to_dict(), exposure_time_s=t, gamma=pair.gamma)
            written.append(out / names[role])
        write_image(out / names["gt"], pair.ground_truth.codes, "PNG-16")
        written.append(out / names["gt"])
        entries.append({"id": pair.scene_id, "gamma": pair.gamma, "seed": pair.seed, **names})
    manifest = {"seed": seed, "pairs": entries}
    (out / MANIFEST).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return written


def load_dataset(data_dir):
    """Rebuild :class:`~rawbench.bench.ScenePair` objects from :func:`save_dataset` output."""
    root = Path(data_dir)
    manifest = json.loads((root / MANIFEST).read_text())
    pairs = []
    for entry in manifest["pairs"]:
        short, sh = read_container(root / entry["short"])
        long_, lh = read_container(root / entry["long"])
        profile = CameraProfile.from_dict(sh["profile"])
        y_short = calibrate(SensorFrame(short, sh["bit_depth"]), profile)
        x_long = calibrate(SensorFrame(long_, lh["bit_depth"]), profile)
        gamma = float(lh["gamma"])
        if abs(lh["exposure_time_s"] / sh["exposure_time_s"] - gamma) > 1e-12 * gamma:
            raise ContainerError(f"{entry['id']}: exposure times disagree with the stored ratio")
        codes, depth = read_image(root / entry["gt"])
        gt = QuantizedImage(codes, depth)
        pairs.append(ScenePair(
            scene_id=entry["id"], x_long=x_long, x_short=derive_short_exposure(x_long, gamma),
            y_short=y_short, gamma=gamma, gamma_hat=pair_gamma_hat(y_short, x_long, profile),
            profile=profile, target=dequantize(gt), ground_truth=gt, seed=entry.get("seed", 0),
        ))
    return pairs
