"""Model file envelope: a self-describing header line followed by a pickle payload."""

from __future__ import annotations

import json
import pickle
from pathlib import Path

MAGIC = b"PRESTI-MODEL\n"
FORMAT_VERSION = 1


def save_model(path: str | Path, kind: str, state: dict) -> None:
    header = json.dumps({"format_version": FORMAT_VERSION, "kind": kind})
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header.encode("utf-8"))
        fh.write(b"\n")
        pickle.dump(state, fh, protocol=4)


def load_model(path: str | Path) -> tuple[str, dict]:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path} is not a model file")
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("format_version") != FORMAT_VERSION:
            raise ValueError(
                f"{path}: unsupported model format version {header.get('format_version')}"
            )
        state = pickle.load(fh)
    return header["kind"], state
