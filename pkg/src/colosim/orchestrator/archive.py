"""Immutable experiment archives with a checksummed manifest."""

import hashlib
import json
import os
import shutil
import stat
from pathlib import Path

MANIFEST = "manifest.json"


class ArchiveError(RuntimeError):
    pass


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _walk(root):
    root = Path(root)
    return sorted(p for p in root.rglob("*") if p.is_file() and p.name != MANIFEST)


def build_manifest(root, exp_id):
    files = [{"path": p.relative_to(root).as_posix(), "size": p.stat().st_size,
              "sha256": _sha256(p)} for p in _walk(root)]
    return {"exp_id": exp_id, "files": files}


def collect_logs(workdir, archive_root, exp_id):
    """Move a finished experiment's directory to ``archive_root/exp_id``.

    Files are copied into a staging directory first and only renamed into
    place once the manifest is written, so a failure leaves the source
    untouched and no partial archive behind. Archived files are read-only.
    """
    workdir, archive_root = Path(workdir), Path(archive_root)
    dest = archive_root / exp_id
    if dest.exists():
        raise ArchiveError(f"{exp_id!r} is already archived; archives are immutable")
    if not workdir.is_dir():
        raise ArchiveError(f"no log directory at {workdir}")
    staging = archive_root / f".{exp_id}.partial"
    try:
        archive_root.mkdir(parents=True, exist_ok=True)
        if staging.exists():
            shutil.rmtree(staging)
        shutil.copytree(workdir, staging)
        manifest = build_manifest(staging, exp_id)
        (staging / MANIFEST).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
        for p in staging.rglob("*"):
            if p.is_file():
                p.chmod(stat.S_IRUSR | stat.S_IRGRP | stat.S_IROTH)
        os.rename(staging, dest)
    except OSError as exc:
        shutil.rmtree(staging, ignore_errors=True)
        raise ArchiveError(f"archiving {exp_id!r} failed: {exc}") from exc
    shutil.rmtree(workdir)
    return manifest


def read_manifest(archive_dir):
    return json.loads((Path(archive_dir) / MANIFEST).read_text())


def verify_archive(archive_dir):
    """Recompute every checksum; return the paths that no longer match."""
    archive_dir = Path(archive_dir)
    bad = []
    listed = set()
    for entry in read_manifest(archive_dir)["files"]:
        p = archive_dir / entry["path"]
        listed.add(entry["path"])
        if not p.is_file() or p.stat().st_size != entry["size"] or _sha256(p) != entry["sha256"]:
            bad.append(entry["path"])
    extra = [p.relative_to(archive_dir).as_posix() for p in _walk(archive_dir)]
    bad.extend(x for x in extra if x not in listed)
    return bad
