"""
Atomic File Writes
Outputs are written to a temporary file in the target directory and renamed
into place on success, so a failed run never leaves a valid-looking file.
Run directories are staged the same way and committed as a set
"""

import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path

import yaml


@contextmanager
def atomic_path(path):
    """
    Yield a temporary path next to `path`; rename onto it if the block succeeds

    Args:
        path: Final destination
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix='.tmp', dir=target.parent)
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


@contextmanager
def atomic_directory(path, last=()):
    """
    Yield a staging directory next to `path`; move its files into `path` if
    the block succeeds

    A missing target is created by a single rename. Into an existing target,
    files named in `last` are removed first and moved in after the rest

    Args:
        path: Final directory
        last: File names committed after the rest
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=f".{target.name}.", suffix='.tmp', dir=target.parent))
    try:
        yield stage
        if not target.exists():
            os.rename(stage, target)
            return
        names = sorted(p.name for p in stage.iterdir())
        for name in last:
            (target / name).unlink(missing_ok=True)
        ordered = [n for n in names if n not in last] + [n for n in last if n in names]
        for name in ordered:
            os.replace(stage / name, target / name)
        stage.rmdir()
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise


def write_csv(frame, path, **kwargs):
    """Write a pandas DataFrame as CSV (no index unless asked)"""
    kwargs.setdefault('index', False)
    kwargs.setdefault('lineterminator', '\n')
    with atomic_path(path) as tmp:
        frame.to_csv(tmp, **kwargs)
    return Path(path)


def write_yaml(data, path):
    with atomic_path(path) as tmp:
        with open(tmp, 'w') as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)
    return Path(path)


def read_yaml(path):
    yaml_file = Path(path)
    if not yaml_file.exists():
        raise FileNotFoundError(f"File not found: {path}")
    with open(yaml_file, 'r') as f:
        return yaml.safe_load(f) or {}
