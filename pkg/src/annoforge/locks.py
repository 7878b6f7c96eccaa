"""Lease-based exclusive image assignment.

At most one live lease per image; a lease dies after ttl seconds without
activity (default 30 minutes). Every operation takes `now` explicitly so
expiry is testable with a manual clock, and the same expiry predicate is
used by the lazy checks and the periodic sweep. All operations serialize
on one lock (the lease table is a single serialization domain).

Leases are journaled so a restart never double-assigns: the journal is
replayed on boot and entries already expired at boot are dropped.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .errors import LeaseExpired, UnknownToken
from .journal import Journal

DEFAULT_TTL_SECONDS = 30 * 60.0


@dataclass
class ImageLease:
    lease_token: str
    image_id: str
    folder_id: str
    holder: str
    acquired_at: float
    last_activity: float
    ttl: float

    def expired(self, now: float) -> bool:
        return now - self.last_activity > self.ttl

    def to_json(self) -> dict:
        return {
            "lease_token": self.lease_token,
            "image_id": self.image_id,
            "folder_id": self.folder_id,
            "holder": self.holder,
            "acquired_at": self.acquired_at,
            "last_activity": self.last_activity,
            "ttl": self.ttl,
        }


class LockManager:
    """The catalog must expose images_in_folder(folder_id) -> [ImageRecord]
    (raising UnknownFolder) and live_annotations(image_id) -> list; an image
    with live annotations is never handed out."""

    def __init__(self, catalog, ttl_seconds: float = DEFAULT_TTL_SECONDS,
                 journal_path: Optional[Path | str] = None, now: float = 0.0):
        self.catalog = catalog
        self.ttl = float(ttl_seconds)
        self._lock = threading.Lock()
        self._leases: dict[str, ImageLease] = {}
        self._by_image: dict[str, str] = {}
        self._journal: Optional[Journal] = None
        if journal_path is not None:
            self._replay(Path(journal_path), now)
            self._journal = Journal(journal_path)

    # --- journal -------------------------------------------------------------

    def _replay(self, path: Path, now: float) -> None:
        for event in Journal.replay(path):
            kind = event.get("type")
            if kind == "acquire":
                lease = ImageLease(
                    lease_token=event["lease_token"],
                    image_id=event["image_id"],
                    folder_id=event["folder_id"],
                    holder=event["holder"],
                    acquired_at=event["acquired_at"],
                    last_activity=event["last_activity"],
                    ttl=event["ttl"],
                )
                self._leases[lease.lease_token] = lease
                self._by_image[lease.image_id] = lease.lease_token
            elif kind == "heartbeat":
                lease = self._leases.get(event["lease_token"])
                if lease is not None:
                    lease.last_activity = event["at"]
            elif kind in ("release", "expire"):
                for token in event.get("tokens", [event.get("lease_token")]):
                    self._drop(token)
        for token in [t for t, l in self._leases.items() if l.expired(now)]:
            self._drop(token)

    def _log(self, record: dict) -> None:
        if self._journal is not None:
            self._journal.append(record)

    def _drop(self, token: Optional[str]) -> Optional[ImageLease]:
        lease = self._leases.pop(token, None) if token else None
        if lease is not None and self._by_image.get(lease.image_id) == token:
            del self._by_image[lease.image_id]
        return lease

    # --- operations -------------------------------------------------------------

    def acquire_next(self, folder_id: str, user_id: str, now: float,
                     priority_order: Optional[Sequence[str]] = None):
        """First unannotated, unleased image in priority order, or None.

        Idempotent per (user, folder): re-requesting while holding a live
        lease in the folder returns the same image and token.
        """
        images = self.catalog.images_in_folder(folder_id)
        by_id = {im.image_id: im for im in images}
        with self._lock:
            self._expire_locked(now)
            for lease in self._leases.values():
                if lease.holder == user_id and lease.folder_id == folder_id:
                    return by_id[lease.image_id], lease
            order = [i for i in priority_order if i in by_id] if priority_order \
                else sorted(by_id)
            for image_id in order:
                if image_id in self._by_image:
                    continue
                if self.catalog.live_annotations(image_id):
                    continue
                lease = ImageLease(
                    lease_token=secrets.token_hex(16),
                    image_id=image_id,
                    folder_id=folder_id,
                    holder=user_id,
                    acquired_at=now,
                    last_activity=now,
                    ttl=self.ttl,
                )
                self._leases[lease.lease_token] = lease
                self._by_image[image_id] = lease.lease_token
                self._log({"type": "acquire", **lease.to_json()})
                return by_id[image_id], lease
            return None

    def heartbeat(self, lease_token: str, now: float) -> ImageLease:
        with self._lock:
            lease = self._leases.get(lease_token)
            if lease is None:
                raise UnknownToken(f"no lease {lease_token!r}")
            if lease.expired(now):
                self._drop(lease_token)
                self._log({"type": "expire", "tokens": [lease_token]})
                raise LeaseExpired(
                    f"lease idle longer than {lease.ttl:.0f}s; re-acquire the image")
            lease.last_activity = now
            self._log({"type": "heartbeat", "lease_token": lease_token, "at": now})
            return lease

    def release(self, lease_token: str, now: Optional[float] = None) -> bool:
        """Remove the lease if present; True only if it was still live."""
        with self._lock:
            lease = self._leases.get(lease_token)
            if lease is None:
                return False
            was_live = now is None or not lease.expired(now)
            self._drop(lease_token)
            self._log({"type": "release", "lease_token": lease_token})
            return was_live

    def expire_stale(self, now: float) -> int:
        with self._lock:
            return self._expire_locked(now)

    def _expire_locked(self, now: float) -> int:
        stale = [t for t, l in self._leases.items() if l.expired(now)]
        for token in stale:
            self._drop(token)
        if stale:
            self._log({"type": "expire", "tokens": stale})
        return len(stale)

    def validate_token(self, lease_token: str, image_id: str, now: float) -> bool:
        """True (Ok) iff the token exists, maps to image_id, and is unexpired."""
        with self._lock:
            lease = self._leases.get(lease_token)
            return (lease is not None and lease.image_id == image_id
                    and not lease.expired(now))

    # --- snapshots ---------------------------------------------------------------

    def get(self, lease_token: str) -> Optional[ImageLease]:
        with self._lock:
            return self._leases.get(lease_token)

    def leased_image_ids(self, now: float) -> set[str]:
        with self._lock:
            return {l.image_id for l in self._leases.values() if not l.expired(now)}

    def live_leases(self, now: float) -> list[ImageLease]:
        with self._lock:
            return [l for l in self._leases.values() if not l.expired(now)]

    def close(self) -> None:
        if self._journal is not None:
            self._journal.close()
