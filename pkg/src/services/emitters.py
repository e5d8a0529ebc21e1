"""Artifact writers: CSV with metadata headers, SVG plots, plain-text reports.

CSV files open with ``# key=value`` lines; floats are written with 17
significant digits so every value round-trips exactly.
"""

import csv
import html
import math
from collections.abc import Iterable, Sequence
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from src.config.logging import get_logger
from src.config.settings import get_settings
from src.models.hausdorff import MetricPointCloud
from src.services.errors import InputError, LabError

logger = get_logger(__name__)


def format_value(value: object, digits: int | None = None) -> str:
    """CSV cell text; floats use ``digits`` significant digits (default from settings)."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{digits or get_settings().output.float_digits}g}"
    return str(value)


def metadata_lines(metadata: dict[str, object]) -> list[str]:
    """``# key=value`` header lines in insertion order."""
    return [f"# {key}={format_value(value)}" for key, value in metadata.items()]


def write_csv(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[object]], metadata: dict[str, object]
) -> Path:
    """CSV with a metadata preamble."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        for line in metadata_lines(metadata):
            handle.write(line + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info("csv_written", path=str(path), rows=count)
    return path


def write_text(path: Path, text: str, metadata: dict[str, object]) -> Path:
    """Plain-text report with the metadata block first."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(metadata_lines(metadata)) + "\n\n" + text)
    logger.info("report_written", path=str(path))
    return path


def write_error_csv(directory: Path, error: LabError) -> Path:
    """error.csv with code, error_type, exit_code, message."""
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "error.csv"
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["code", "error_type", "exit_code", "message"])
        writer.writerow([error.code, type(error).__name__, error.exit_code, str(error)])
    return path


def read_csv(path: Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """(metadata, header, rows) of a CSV written by ``write_csv``."""
    metadata: dict[str, str] = {}
    with path.open(newline="") as handle:
        lines = handle.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("# ") and "=" in line and not body:
            key, _, value = line[2:].partition("=")
            metadata[key] = value
        elif line.strip():
            body.append(line)
    reader = list(csv.reader(body))
    if not reader:
        raise InputError(f"{path} has no header")
    return metadata, reader[0], reader[1:]


def read_cloud(path: Path) -> MetricPointCloud:
    """Point cloud from a CSV with ``xi_*`` (and optionally ``xibar_*``) columns.

    Files without such columns are read as one projective factor made of every
    column.
    """
    _, header, rows = read_csv(path)
    xi = [i for i, name in enumerate(header) if name.startswith("xi_")]
    xibar = [i for i, name in enumerate(header) if name.startswith("xibar_")]
    columns = xi + xibar or list(range(len(header)))
    try:
        data = np.array([[float(row[i]) for i in columns] for row in rows if row], dtype=float)
    except (ValueError, IndexError) as exc:
        raise InputError(f"bad value in cloud file {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[0] == 0:
        raise InputError(f"cloud file {path} has no rows")
    if xi and xibar:
        return MetricPointCloud(
            factors=(data[:, : len(xi)], data[:, len(xi) :]), metric="product-linf", label=path.stem
        )
    return MetricPointCloud(factors=(data,), metric="projective", label=path.stem)


class SvgPlot:
    """Minimal SVG canvas in data coordinates with a metadata comment."""

    def __init__(self, width: float = 480.0, height: float = 480.0, title: str = ""):
        self.width = width
        self.height = height
        self.title = title
        self.min_x = self.max_x = self.min_y = self.max_y = math.nan
        self.items: list[tuple[str, dict]] = []

    def _require(self, x: float, y: float) -> None:
        if math.isnan(self.min_x):
            self.min_x = self.max_x = x
            self.min_y = self.max_y = y
        else:
            self.min_x, self.max_x = min(self.min_x, x), max(self.max_x, x)
            self.min_y, self.max_y = min(self.min_y, y), max(self.max_y, y)

    def points(self, xy: np.ndarray, radius: float = 1.2, color: str = "#1f4e79") -> None:
        """Scatter of (n, 2) points."""
        for x, y in xy:
            self._require(float(x), float(y))
        self.items.append(("points", {"xy": np.asarray(xy, dtype=float), "r": radius, "color": color}))

    def polyline(self, xy: np.ndarray, color: str = "#000000", width: float = 1.0) -> None:
        """Connected line through (n, 2) points."""
        for x, y in xy:
            self._require(float(x), float(y))
        self.items.append(("line", {"xy": np.asarray(xy, dtype=float), "color": color, "width": width}))

    def _transform(self, xy: np.ndarray) -> np.ndarray:
        pad = 0.05
        span_x = (self.max_x - self.min_x) or 1.0
        span_y = (self.max_y - self.min_y) or 1.0
        u = (xy[:, 0] - self.min_x) / span_x
        v = (xy[:, 1] - self.min_y) / span_y
        return np.column_stack(
            [(pad + (1 - 2 * pad) * u) * self.width, (1 - pad - (1 - 2 * pad) * v) * self.height]
        )

    def render(self, metadata: dict[str, object], include_timestamp: bool | None = None) -> str:
        """SVG document text."""
        stamp = get_settings().output.include_timestamp if include_timestamp is None else include_timestamp
        meta = dict(metadata)
        if stamp:
            meta["timestamp"] = datetime.now(timezone.utc).isoformat()
        comment = "\n".join(f"{k}={format_value(v)}".replace("--", "- -") for k, v in meta.items())
        parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f"<!--\n{comment}\n-->",
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width:g}" height="{self.height:g}" '
            f'viewBox="0 0 {self.width:g} {self.height:g}">',
            f'<rect x="0" y="0" width="{self.width:g}" height="{self.height:g}" style="fill:#ffffff"/>',
        ]
        if self.title:
            parts.append(f'<text x="8" y="16" font-size="12">{html.escape(self.title)}</text>')
        for kind, spec in self.items:
            xy = self._transform(spec["xy"]) if len(spec["xy"]) else spec["xy"]
            if kind == "points":
                for x, y in xy:
                    parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{spec["r"]:g}" style="fill:{spec["color"]}"/>')
            else:
                coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in xy)
                parts.append(
                    f'<polyline points="{coords}" style="fill:none;stroke:{spec["color"]};'
                    f'stroke-width:{spec["width"]:g}"/>'
                )
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    def save(self, path: Path, metadata: dict[str, object]) -> Path:
        """Write the document."""
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(metadata))
        logger.info("svg_written", path=str(path), items=len(self.items))
        return path
