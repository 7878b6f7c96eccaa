"""Composition root: wires store, locks, scheduler, gateway, and journals.

Booting replays both journals, so a hard kill loses nothing that was
acknowledged: annotations live in per-image documents written on every
mutation, leases and gateway state replay from their journals.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..active_learning import ActiveLearningScheduler
from ..clock import Clock, SystemClock
from ..domain import AnnotationStore
from ..gateway import ModelWorkerGateway
from ..locks import LockManager
from .config import ServerConfig


@dataclass
class AppState:
    config: ServerConfig
    clock: Clock
    store: AnnotationStore
    locks: LockManager
    scheduler: ActiveLearningScheduler
    gateway: ModelWorkerGateway

    @classmethod
    def boot(cls, config: ServerConfig, clock: Optional[Clock] = None) -> "AppState":
        clock = clock or SystemClock()
        root = Path(config.data_root)
        store = AnnotationStore(
            root, clock=clock,
            auto_accept_threshold=config.auto_accept_threshold,
        )
        locks = LockManager(
            store,
            ttl_seconds=config.lock_ttl_minutes * 60.0,
            journal_path=root / "journal" / "leases.jsonl",
            now=clock.now(),
        )
        scheduler = ActiveLearningScheduler(
            store,
            auto_accept_threshold=config.auto_accept_threshold,
            uncertain_low=config.uncertain_low,
            uncertain_high=config.uncertain_high,
            unpredicted_score=config.unpredicted_score,
            supersample=config.supersample,
        )
        gateway = ModelWorkerGateway(
            store, scheduler, clock,
            jobs_dir=root / "jobs",
            journal_path=root / "journal" / "gateway.jsonl",
            abandon_seconds=config.job_abandon_minutes * 60.0,
        )
        if config.seed_models and not gateway.models:
            gateway.seed_default_models()
        return cls(config=config, clock=clock, store=store, locks=locks,
                   scheduler=scheduler, gateway=gateway)

    def shutdown(self) -> None:
        self.locks.close()
        self.gateway.close()
