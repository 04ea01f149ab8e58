"""Indexed image stores backed by a JSON manifest."""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Optional, Sequence

from uavmission.core import SceneImage
from uavmission.errors import ConfigurationError, IndexOutOfRange


class ImageStore:
    """Images addressed by position, loaded lazily and cached.

    Manifest format: ``{"images": [{"id": ..., "path": ...}, ...]}`` with
    paths relative to the manifest's directory.
    """

    def __init__(self, entries: Sequence[tuple[str, Path | SceneImage]]):
        ids = [i for i, _ in entries]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("image ids must be unique within a store")
        self._entries = list(entries)
        self._cache: dict[int, SceneImage] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_manifest(cls, path: str | Path) -> "ImageStore":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
            images = doc["images"]
            entries = [(str(e["id"]), path.parent / e["path"]) for e in images]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigurationError(f"bad image manifest {path}: {exc}") from exc
        return cls(entries)

    @classmethod
    def from_images(cls, images: Sequence[SceneImage]) -> "ImageStore":
        return cls([(im.id, im) for im in images])

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def ids(self) -> list[str]:
        return [i for i, _ in self._entries]

    def index_of(self, image_id: str) -> Optional[int]:
        for i, (eid, _) in enumerate(self._entries):
            if eid == image_id:
                return i
        return None

    def get(self, index: int) -> SceneImage:
        if isinstance(index, bool) or not isinstance(index, int):
            raise TypeError(f"image index must be an integer, got {index!r}")
        if not 0 <= index < len(self._entries):
            raise IndexOutOfRange(f"image index {index} outside 0..{len(self._entries) - 1}")
        with self._lock:
            cached = self._cache.get(index)
            if cached is None:
                image_id, src = self._entries[index]
                if isinstance(src, SceneImage):
                    cached = src if src.id == image_id else SceneImage(image_id, src.image, src.source_path)
                else:
                    try:
                        cached = SceneImage.load(src, image_id)
                    except OSError as exc:
                        raise ConfigurationError(f"cannot read image {src}: {exc}") from exc
                self._cache[index] = cached
            return cached


def read_image(index: int, store: ImageStore) -> SceneImage:
    return store.get(index)


def read_image_for_simulation(index: int, store: ImageStore) -> SceneImage:
    return store.get(index)
