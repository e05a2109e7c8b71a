"""Persistent review queue driving the human refinement loop.

State lives in an append-only event log (one JSON event per line) with
periodic snapshot compaction; replaying the log reconstructs the exact
queue state after a restart. Item status machine:

    pending -> approved                   (scores submitted, no flag)
    pending -> flagged                    (discrepancy note)
    flagged -> pending                    (regenerated, revision + 1)
    flagged -> needs-manual-review        (refinement bound exhausted)
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field

from .dataset import ExplanationInstance, instance_from_dict
from .errors import KgExplainError

EVENTS_FILE = "events.jsonl"
SNAPSHOT_FILE = "snapshot.json"
STORE_VERSION = 1

STATUS_PENDING = "pending"
STATUS_APPROVED = "approved"
STATUS_FLAGGED = "flagged"
STATUS_MANUAL = "needs-manual-review"


class UnknownItem(KgExplainError):
    pass


class IllegalTransition(KgExplainError):
    pass


@dataclass
class ReviewItem:
    item_id: str
    instance: ExplanationInstance
    status: str = STATUS_PENDING
    flags: list[str] = field(default_factory=list)
    submitted_scores: dict | None = None
    revision_history: list[ExplanationInstance] = field(default_factory=list)
    created_seq: int = 0

    @property
    def revision(self) -> int:
        return len(self.revision_history)

    def to_json_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "instance": self.instance.to_json_dict(),
            "status": self.status,
            "flags": list(self.flags),
            "submitted_scores": self.submitted_scores,
            "revision": self.revision,
            "revision_history": [inst.to_json_dict() for inst in self.revision_history],
            "created_seq": self.created_seq,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ReviewItem":
        return cls(
            item_id=doc["item_id"],
            instance=instance_from_dict(doc["instance"]),
            status=doc["status"],
            flags=list(doc["flags"]),
            submitted_scores=doc.get("submitted_scores"),
            revision_history=[instance_from_dict(d) for d in doc.get("revision_history", [])],
            created_seq=doc.get("created_seq", 0),
        )


class ReviewStore:
    """Single-node durable review queue with per-item exclusive locks."""

    def __init__(self, directory: str | os.PathLike, max_refinements: int = 3, compact_every: int = 200):
        self.directory = os.fspath(directory)
        os.makedirs(self.directory, exist_ok=True)
        self.max_refinements = max_refinements
        self.compact_every = compact_every
        self._items: dict[str, ReviewItem] = {}
        self._seq = 0
        self._events_since_compact = 0
        self._append_lock = threading.Lock()
        self._item_locks: dict[str, threading.Lock] = {}
        self._load()

    # -- persistence ------------------------------------------------------

    def _events_path(self) -> str:
        return os.path.join(self.directory, EVENTS_FILE)

    def _snapshot_path(self) -> str:
        return os.path.join(self.directory, SNAPSHOT_FILE)

    def _load(self) -> None:
        snap = self._snapshot_path()
        if os.path.exists(snap):
            with open(snap, encoding="utf-8") as fh:
                doc = json.load(fh)
            if doc.get("version") != STORE_VERSION:
                raise KgExplainError(f"unsupported review store version {doc.get('version')}")
            self._seq = doc["seq"]
            for item_doc in doc["items"]:
                item = ReviewItem.from_json_dict(item_doc)
                self._items[item.item_id] = item
        if os.path.exists(self._events_path()):
            with open(self._events_path(), encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    event = json.loads(line)
                    if event["seq"] > self._seq:
                        self._apply(event)
                        self._seq = event["seq"]

    def _append(self, event: dict) -> dict:
        with self._append_lock:
            self._seq += 1
            event = {"seq": self._seq, "ts": time.time(), **event}
            if event["type"] == "enqueue" and event.get("item_id") is None:
                event["item_id"] = f"item-{self._seq:06d}"  # id minted under the lock
            with open(self._events_path(), "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, ensure_ascii=False) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._apply(event)
            self._events_since_compact += 1
            if self._events_since_compact >= self.compact_every:
                self._compact_locked()
        return event

    def compact(self) -> None:
        with self._append_lock:
            self._compact_locked()

    def _compact_locked(self) -> None:
        doc = {
            "version": STORE_VERSION,
            "seq": self._seq,
            "items": [item.to_json_dict() for item in sorted(self._items.values(), key=lambda i: i.created_seq)],
        }
        tmp = self._snapshot_path() + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, ensure_ascii=False)
        os.replace(tmp, self._snapshot_path())
        open(self._events_path(), "w").close()
        self._events_since_compact = 0

    # -- state machine ----------------------------------------------------

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "enqueue":
            item = ReviewItem(
                item_id=event["item_id"],
                instance=instance_from_dict(event["instance"]),
                created_seq=event["seq"],
            )
            self._items[item.item_id] = item
            return
        item = self._items.get(event["item_id"])
        if item is None:
            raise UnknownItem(f"unknown review item {event['item_id']!r}")
        if kind == "scores":
            item.submitted_scores = event["scores"]
            item.status = STATUS_APPROVED
        elif kind == "flag":
            item.flags.append(event["note"])
            item.status = STATUS_FLAGGED
        elif kind == "regenerated":
            item.revision_history.append(item.instance)
            item.instance = instance_from_dict(event["instance"])
            item.status = STATUS_PENDING
        elif kind == "exhausted":
            item.status = STATUS_MANUAL
        else:
            raise KgExplainError(f"unknown event type {kind!r}")

    # -- public API -------------------------------------------------------

    def item_lock(self, item_id: str) -> threading.Lock:
        with self._append_lock:
            return self._item_locks.setdefault(item_id, threading.Lock())

    def get(self, item_id: str) -> ReviewItem:
        item = self._items.get(item_id)
        if item is None:
            raise UnknownItem(f"unknown review item {item_id!r}")
        return item

    def items(self) -> list[ReviewItem]:
        return sorted(self._items.values(), key=lambda i: i.created_seq)

    def next_pending(self) -> ReviewItem | None:
        pending = [i for i in self._items.values() if i.status == STATUS_PENDING]
        return min(pending, key=lambda i: i.created_seq) if pending else None

    def enqueue(self, instance: ExplanationInstance) -> ReviewItem:
        event = self._append({"type": "enqueue", "item_id": None, "instance": instance.to_json_dict()})
        return self.get(event["item_id"])

    def submit_scores(self, item_id: str, scores: dict) -> ReviewItem:
        item = self.get(item_id)
        if item.status != STATUS_PENDING:
            raise IllegalTransition(f"cannot score an item in status {item.status!r}")
        self._append({"type": "scores", "item_id": item_id, "scores": scores})
        return self.get(item_id)

    def flag(self, item_id: str, note: str) -> tuple[ReviewItem, bool]:
        """Record a discrepancy note.

        Returns the item and whether a regeneration should run; once the
        refinement bound is used up the item goes to manual review instead.
        """
        item = self.get(item_id)
        if item.status not in (STATUS_PENDING,):
            raise IllegalTransition(f"cannot flag an item in status {item.status!r}")
        self._append({"type": "flag", "item_id": item_id, "note": note})
        if self.get(item_id).revision >= self.max_refinements:
            self._append({"type": "exhausted", "item_id": item_id})
            return self.get(item_id), False
        return self.get(item_id), True

    def complete_regeneration(self, item_id: str, new_instance: ExplanationInstance) -> ReviewItem:
        item = self.get(item_id)
        if item.status != STATUS_FLAGGED:
            raise IllegalTransition(f"cannot regenerate an item in status {item.status!r}")
        self._append({"type": "regenerated", "item_id": item_id, "instance": new_instance.to_json_dict()})
        return self.get(item_id)

    def state_fingerprint(self) -> list[dict]:
        """Serializable view of the whole queue, for durability comparisons."""
        return [item.to_json_dict() for item in self.items()]
