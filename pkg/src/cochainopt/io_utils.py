"""File I/O: point CSVs, PGM/CSV images, barcode exports, run manifests.

All floats are printed with 17 significant digits so CSV round-trips are
bit-exact and reruns of a manifest reproduce identical bytes.
"""

import hashlib
import json
import math
import time

import numpy as np

from .errors import InputError


def fmt(x):
    """17-significant-digit float formatting (round-trip safe)."""
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{float(x):.17g}"


def read_points_csv(path):
    """One point per row; a non-numeric first row is treated as a header."""
    rows = []
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise InputError(f"{path}: empty input file")
    start = 0
    try:
        [float(c) for c in lines[0].replace(";", ",").split(",") if c]
    except ValueError:
        start = 1
    width = None
    for lineno, ln in enumerate(lines[start:], start=start + 1):
        cells = [c for c in ln.replace(";", ",").split(",") if c.strip()]
        try:
            row = [float(c) for c in cells]
        except ValueError as e:
            raise InputError(f"{path}:{lineno}: cannot parse point row ({e})") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
        rows.append(row)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def write_points_csv(points, path):
    with open(path, "w") as fh:
        for row in np.asarray(points, dtype=np.float64):
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def read_series_csv(path):
    """Feature series, one feature per row."""
    return read_points_csv(path)


def _read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    i = 0
    while len(tokens) < 4 and i < len(data):
        # header tokens with '#' comments
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        tokens.append(data[i:j])
        i = j
    if len(tokens) < 4 or tokens[0] not in (b"P2", b"P5"):
        raise InputError(f"{path}: not a P2/P5 PGM file")
    magic = tokens[0]
    try:
        w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError:
        raise InputError(f"{path}: malformed PGM header") from None
    if magic == b"P2":
        try:
            vals = [int(t) for t in data[i:].split()]
        except ValueError:
            raise InputError(f"{path}: malformed P2 pixel data") from None
    else:
        i += 1  # single whitespace after maxval
        if maxval > 255:
            raise InputError(f"{path}: 16-bit P5 not supported")
        vals = list(data[i : i + w * h])
    if len(vals) != w * h:
        raise InputError(f"{path}: expected {w * h} pixels, found {len(vals)}")
    img = np.array(vals, dtype=np.float64).reshape(h, w)
    return img / maxval


def read_image(path, invert=False):
    """PGM (P2/P5) or CSV grid of reals scaled/validated into [0, 1]."""
    p = str(path)
    if p.lower().endswith(".pgm"):
        img = _read_pgm(p)
    else:
        img = read_points_csv(p)
        if img.min() < 0 or img.max() > 1:
            raise InputError(f"{path}: CSV image values must lie in [0, 1]")
    return 1.0 - img if invert else img


def write_image_pgm(image, path, maxval=255):
    img = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    quant = np.rint(img * maxval).astype(int)
    with open(path, "w") as fh:
        fh.write(f"P2\n{img.shape[1]} {img.shape[0]}\n{maxval}\n")
        for row in quant:
            fh.write(" ".join(str(v) for v in row) + "\n")
    return path


def write_image_csv(image, path):
    return write_points_csv(image, path)


def write_barcode_csv(barcode, path, degree=None):
    with open(path, "w") as fh:
        fh.write("degree,birth,death,birth_simplex,death_simplex\n")
        for deg, birth, death, bs, ds in barcode.to_csv_rows():
            if degree is not None and deg != degree:
                continue
            fh.write(f"{deg},{fmt(birth)},{fmt(death)},{bs},{ds}\n")
    return path


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_trace_csv(run, path):
    """loss / bar endpoints / normalized persistence per iteration."""
    with open(path, "w") as fh:
        fh.write("iteration,loss,birth,death,normalized_persistence\n")
        for r in run.records:
            fh.write(
                f"{r.iteration},{fmt(r.loss)},{fmt(r.birth)},{fmt(r.death)},"
                f"{fmt(r.normalized_persistence)}\n"
            )
    return path


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    """Reproducibility record written next to every command's artifacts."""

    def __init__(self, command, args, seed):
        config = {
            k: v
            for k, v in sorted(args.items())
            if isinstance(v, (str, int, float, bool, type(None)))
        }
        self.data = {
            "command": command,
            "config": config,
            "seed": seed,
            "inputs": {},
            "outputs": [],
        }
        self._t0 = time.monotonic()

    def add_input(self, path):
        self.data["inputs"][str(path)] = file_sha256(path)

    def add_output(self, path):
        self.data["outputs"].append(str(path))

    def write(self, path):
        self.data["wall_clock_seconds"] = round(time.monotonic() - self._t0, 6)
        write_json(self.data, path)
        return path
