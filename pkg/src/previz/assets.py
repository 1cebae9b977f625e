"""Content-addressed asset storage.

Artifacts (frames, masks, generated results) are stored once under their
sha256 and referenced everywhere by AssetRef. Stores never mutate or
delete; a ref is valid forever within its store.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional


class AssetError(Exception):
    pass


class UnknownAsset(AssetError):
    pass


@dataclass(frozen=True)
class AssetRef:
    hash: str  # sha256 hex digest
    kind: str  # media kind, e.g. "image/png", "text/plain"
    size: int

    def to_dict(self) -> dict:
        return {"hash": self.hash, "kind": self.kind, "size": self.size}

    @staticmethod
    def from_dict(d: dict) -> "AssetRef":
        return AssetRef(hash=d["hash"], kind=d["kind"], size=int(d["size"]))


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class MemoryAssetStore:
    def __init__(self):
        self._blobs: dict[str, bytes] = {}
        self._kinds: dict[str, str] = {}

    def put(self, data: bytes, kind: str = "application/octet-stream") -> AssetRef:
        h = _digest(data)
        if h not in self._blobs:
            self._blobs[h] = bytes(data)
            self._kinds[h] = kind
        return AssetRef(hash=h, kind=self._kinds[h], size=len(data))

    def get(self, ref) -> bytes:
        h = ref.hash if isinstance(ref, AssetRef) else str(ref)
        try:
            return self._blobs[h]
        except KeyError:
            raise UnknownAsset(f"no asset {h}") from None

    def kind_of(self, h: str) -> Optional[str]:
        return self._kinds.get(h)

    def has(self, h: str) -> bool:
        return h in self._blobs

    def __len__(self) -> int:
        return len(self._blobs)


class FileAssetStore:
    """Hash-addressed blobs under <root>/ab/cdef..., one file per asset."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, h: str) -> Path:
        return self.root / h[:2] / h[2:]

    def put(self, data: bytes, kind: str = "application/octet-stream") -> AssetRef:
        h = _digest(data)
        path = self._path(h)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(data)
            tmp.replace(path)
        return AssetRef(hash=h, kind=kind, size=len(data))

    def get(self, ref) -> bytes:
        h = ref.hash if isinstance(ref, AssetRef) else str(ref)
        path = self._path(h)
        if not path.exists():
            raise UnknownAsset(f"no asset {h}")
        data = path.read_bytes()
        if _digest(data) != h:
            raise AssetError(f"asset {h} corrupted on disk")
        return data

    def has(self, h: str) -> bool:
        return self._path(h).exists()

    def __len__(self) -> int:
        return sum(1 for p in self.root.glob("*/*") if p.is_file() and not p.name.endswith(".tmp"))


def verify_ref(store, ref: AssetRef) -> bool:
    try:
        data = store.get(ref)
    except AssetError:
        return False
    return _digest(data) == ref.hash and len(data) == ref.size
