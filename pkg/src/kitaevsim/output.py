"""Deterministic CSV/JSON emission with reproducibility headers.

Every output file starts with a header block recording the tool version,
the hbar = 1 convention, the engine, a hash of the fully-serialized run
configuration, and the configuration itself.  Floats are written with 17
significant digits so files round-trip bit-exactly and diff cleanly.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def canonical_config(config: dict) -> str:
    return "\n".join(f"{k}={config[k]}" for k in sorted(config))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_config(config).encode()).hexdigest()[:16]


def header_block(config: dict, engine: str) -> list[str]:
    lines = [
        f"# kitaevsim v{__version__}",
        "# convention: hbar=1",
        f"# engine: {engine}",
        f"# config_hash: {config_hash(config)}",
    ]
    for k in sorted(config):
        lines.append(f"# config: {k}={config[k]}")
    return lines


def write_csv(
    path: Path, config: dict, engine: str, columns: list[str], rows
) -> None:
    """CSV with a '#' header block; floats at full round-trip precision."""
    out = header_block(config, engine)
    out.append(",".join(columns))
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, bool):
                cells.append("1" if cell else "0")
            elif isinstance(cell, float):
                cells.append(format_float(cell))
            else:
                cells.append(str(cell))
        out.append(",".join(cells))
    path.write_text("\n".join(out) + "\n")


def write_json(path: Path, config: dict, engine: str, payload: dict) -> None:
    """JSON document whose first key is the reproducibility header."""
    doc = {
        "meta": {
            "tool": f"kitaevsim v{__version__}",
            "convention": "hbar=1",
            "engine": engine,
            "config_hash": config_hash(config),
            "config": {k: config[k] for k in sorted(config)},
        }
    }
    doc.update(payload)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


PLOT_SCRIPT = '''\
#!/usr/bin/env python3
"""Self-contained plot of {csv_name}; the data file is the source of truth."""
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

data = np.genfromtxt("{csv_name}", delimiter=",", names=True, comments="#")
x = data[data.dtype.names[0]]
fig, ax = plt.subplots()
for name in data.dtype.names[1:]:
    try:
        ax.plot(x, data[name], label=name)
    except TypeError:
        pass
ax.set_xlabel(data.dtype.names[0])
ax.legend()
fig.savefig("{png_name}", dpi=150, bbox_inches="tight")
print("wrote {png_name}")
'''


def write_plot_script(csv_path: Path) -> Path:
    """Optional companion matplotlib script next to a CSV output."""
    script = csv_path.with_name(f"plot_{csv_path.stem}.py")
    script.write_text(
        PLOT_SCRIPT.format(csv_name=csv_path.name, png_name=csv_path.stem + ".png")
    )
    return script
