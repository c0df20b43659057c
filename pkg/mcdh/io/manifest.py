from __future__ import annotations

import importlib.metadata
import json
import logging
import os
import pathlib
import platform
import sys
import tempfile
from typing import Any, Optional, Sequence, Union

from mcdh.config import RunConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

MANIFEST_NAME = "manifest.json"
VERSIONED_PACKAGES = ("numpy", "jax", "scipy", "pandas", "sqlalchemy", "arviz")


def write_json(path: PathLike, data: Any) -> pathlib.Path:
    """Write 'data' as indented, key-sorted UTF-8 JSON through a temporary sibling that is moved into place."""
    target = pathlib.Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)

    handle, temporary = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as stream:
            json.dump(data, stream, indent=2, sort_keys=True, default=_default)
            stream.write("\n")
        os.replace(temporary, target)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise

    return target


def read_json(path: PathLike) -> Any:
    with open(path, encoding="utf-8") as stream:
        return json.load(stream)


def _default(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    if hasattr(value, "value"):
        return value.value
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)

    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable.")


def package_versions() -> dict[str, str]:
    import mcdh

    versions = {"python": platform.python_version(), "mcdh": mcdh.__version__}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = importlib.metadata.version(name)
        except importlib.metadata.PackageNotFoundError:
            versions[name] = "unknown"

    return versions


def build_manifest(command: str, config: RunConfig, argv: Optional[Sequence[str]] = None, outputs: Sequence[PathLike] = (), **extra: Any) -> dict[str, Any]:
    """Everything needed to re-run a command exactly: the full config, its hash, the seed, package versions and argv."""
    return {
        "command": command,
        "config": config.to_dict(),
        "config_hash": config.hash(),
        "seed": config.seed,
        "versions": package_versions(),
        "argv": list(sys.argv[1:] if argv is None else argv),
        "outputs": sorted(pathlib.Path(output).name for output in outputs),
        **extra,
    }


def write_manifest(directory: PathLike, command: str, config: RunConfig, argv: Optional[Sequence[str]] = None, outputs: Sequence[PathLike] = (), **extra: Any) -> pathlib.Path:
    """Write '<command>.manifest.json' into 'directory'."""
    path = write_json(manifest_path(directory, command), build_manifest(command, config, argv=argv, outputs=outputs, **extra))
    logger.info(f"Wrote manifest '{path}'.")
    return path


def manifest_path(directory: PathLike, command: str) -> pathlib.Path:
    return pathlib.Path(directory) / f"{command}.{MANIFEST_NAME}"
