"""File output: CSV series, JSON summaries, PGM heatmaps, binary snapshots.

Everything written here is a pure function of its inputs, so re-running the
same configuration reproduces every file byte for byte.
"""

from __future__ import annotations

import io as _io
import json
import zipfile
from pathlib import Path

import numpy as np

SNAPSHOT_VERSION = 1


class SnapshotError(Exception):
    pass


def format_value(x) -> str:
    """Numbers rendered with 9 significant digits; integral floats stay short."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return format(v, ".9g")


def write_csv(path, columns: list[str], rows) -> None:
    """Header plus one row per snapshot; UNIX newlines, UTF-8."""
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(format_value(x) for x in row) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing CSV {path}: {exc}") from exc


def write_summary_json(path, obj: dict) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_pgm(matrix: np.ndarray, path, vmin: float, vmax: float) -> None:
    """Binary 8-bit PGM: white at vmin, black at vmax, one pixel per synapse.

    The matrix is (inputs, outputs); the image has outputs as rows and inputs
    as columns. Values are clamped to [vmin, vmax] and mapped linearly with
    the pixel value floored.
    """
    if not vmax > vmin:
        raise ValueError(f"degenerate range: vmin={vmin}, vmax={vmax}")
    img = np.asarray(matrix, dtype=float).T
    frac = (np.clip(img, vmin, vmax) - vmin) / (vmax - vmin)
    pixels = np.floor(255.0 * (1.0 - frac)).astype(np.uint8)
    height, width = pixels.shape
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
            fh.write(pixels.tobytes())
    except OSError as exc:
        raise OSError(f"failed writing PGM {path}: {exc}") from exc


def _rng_state_jsonable(state: dict) -> dict:
    def conv(obj):
        if isinstance(obj, dict):
            return {k: conv(v) for k, v in obj.items()}
        if isinstance(obj, np.ndarray):
            return {"__ndarray__": obj.tolist(), "dtype": str(obj.dtype)}
        if isinstance(obj, (np.integer,)):
            return int(obj)
        return obj

    return conv(state)


def _rng_state_restore(state):
    if isinstance(state, dict):
        if "__ndarray__" in state:
            return np.array(state["__ndarray__"], dtype=state["dtype"])
        return {k: _rng_state_restore(v) for k, v in state.items()}
    return state


def save_snapshot(path, sim, config_hash: str = "") -> None:
    """Persist the full simulation state, including RNG positions."""
    meta = {
        "version": SNAPSHOT_VERSION,
        "config_hash": config_hash,
        "seed": sim.seed,
        "rule": sim.rule,
        "unlearning": sim.unlearning,
        "t_s": sim.t,
        "scenario_id": sim.scenario.id if sim.scenario is not None else None,
        "rng": _rng_state_jsonable(sim.streams.state()),
    }
    arrays = sim.state_arrays()
    arrays["meta_json"] = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
    path = Path(path)
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **arrays)


def load_snapshot(path, sim, expected_hash: str | None = None):
    """Restore a snapshot into a freshly constructed simulation.

    The simulation must already have the matching scenario attached; shape or
    version mismatches and corrupt files raise SnapshotError.
    """
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as data:
            arrays = {k: data[k] for k in data.files}
    except (OSError, ValueError, zipfile.BadZipFile, KeyError) as exc:
        raise SnapshotError(f"corrupt or unreadable snapshot {path}: {exc}") from exc
    try:
        meta = json.loads(bytes(arrays.pop("meta_json")).decode("utf-8"))
    except (KeyError, ValueError) as exc:
        raise SnapshotError(f"snapshot {path} has no readable metadata") from exc
    if meta.get("version") != SNAPSHOT_VERSION:
        raise SnapshotError(
            f"snapshot version {meta.get('version')} does not match {SNAPSHOT_VERSION}"
        )
    if expected_hash is not None and meta["config_hash"] != expected_hash:
        raise SnapshotError("snapshot was produced by a different configuration")
    try:
        sim.restore_arrays(arrays)
    except ValueError as exc:
        raise SnapshotError(str(exc)) from exc
    sim.streams.set_state(_rng_state_restore(meta["rng"]))
    return meta
