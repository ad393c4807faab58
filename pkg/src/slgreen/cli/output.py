import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import matplotlib
import numpy as np
from pydantic import BaseModel, Field

from .. import __version__
from ..greens import GreenGrid
from ..problem import ProblemConfig

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["svg.hashsalt"] = "slgreen"


class RunManifest(BaseModel):
    command: str
    config_digest: str
    version: str = __version__
    integrator: dict
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    outputs: List[str] = []
    notes: List[str] = []


def fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _json_value(value, depth: int) -> str:
    pad, inner = "  " * depth, "  " * (depth + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(k), ensure_ascii=False)}: {_json_value(value[k], depth + 1)}"
                 for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        return "[\n" + ",\n".join(inner + _json_value(v, depth + 1) for v in value) + "\n" + pad + "]"
    if isinstance(value, (float, np.floating)) and math.isfinite(value):
        text = fmt(value)
        # keep integral floats readable back as floats
        return text + ".0" if text.lstrip("-").isdigit() else text
    if isinstance(value, np.integer):
        return str(int(value))
    return json.dumps(value, ensure_ascii=False)


def json_text(payload) -> str:
    """Indented JSON with sorted keys; finite floats carry 17 significant digits like the CSV."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return _json_value(payload, 0) + "\n"


def heatmap_svg(grid: GreenGrid, c: float) -> str:
    m = float(np.max(np.abs(grid.values))) or 1.0
    fig, ax = plt.subplots(figsize=(6, 5))
    image = ax.pcolormesh(grid.xs, grid.ys, grid.values.T, cmap="bwr", vmin=-m, vmax=m, shading="nearest")
    ax.axvline(c, color="black", linewidth=0.8)
    ax.axhline(c, color="black", linewidth=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"G(x, y; λ={grid.lam:g})")
    fig.colorbar(image, ax=ax)
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def emit(text: str, out: Optional[Path], manifest: Optional[RunManifest] = None):
    """Write to `out` (plus a manifest sidecar) or to stdout."""
    if out is None:
        sys.stdout.write(text)
        return
    out.write_bytes(text.encode("utf-8"))
    if manifest is not None:
        manifest = manifest.model_copy(update={"outputs": manifest.outputs + [str(out)]})
        sidecar = out.with_name(out.name + ".manifest.json")
        sidecar.write_bytes(json_text(manifest).encode("utf-8"))


def manifest_for(command: str, config: ProblemConfig, notes: Sequence[str] = ()) -> RunManifest:
    return RunManifest(command=command, config_digest=config.digest(),
                       integrator=config.integrator.model_dump(), notes=list(notes))
