"""File-backed persistence.

Every record is a single JSON document wrapped as
``{"checksum": sha256-of-canonical-body, "body": ...}`` and written
atomically (temp file + rename).  The checksum is verified on load;
a mismatch or undecodable file raises CorruptRecordError rather than
handing back silently broken data.

Layout under ``data_dir``::

    sessions/<session-id>.json     latest session snapshot
    journals/<journal-id>.json     finalized entries, append-only
    actions/<session-id>.json      ordered system action log
    inputs/<session-id>.json       ordered user input log
    profiles/<id>.json  peers/<id>.json  places/<id>.json  people/<id>.json
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from datetime import date
from pathlib import Path
from typing import Any, Iterable

from pydantic import TypeAdapter

from .errors import CorruptRecordError, DuplicateIdError, NotFoundError
from .models import (
    AdolescentProfile,
    JournalEntry,
    PeerProfile,
    PersonEntry,
    PlaceEntry,
    Session,
    SystemAction,
    UserInput,
    canonical_json,
)

_SUBDIRS = (
    "sessions",
    "journals",
    "actions",
    "inputs",
    "profiles",
    "peers",
    "places",
    "people",
)

_ACTIONS_ADAPTER: TypeAdapter[list[SystemAction]] = TypeAdapter(list[SystemAction])
_INPUTS_ADAPTER: TypeAdapter[list[UserInput]] = TypeAdapter(list[UserInput])


def _body_checksum(body: Any) -> str:
    blob = json.dumps(
        body, sort_keys=True, ensure_ascii=False, separators=(",", ":")
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class FileStore:
    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        for sub in _SUBDIRS:
            (self.root / sub).mkdir(parents=True, exist_ok=True)

    # -- raw document helpers ---------------------------------------------

    def _path(self, kind: str, doc_id: str) -> Path:
        if not doc_id or "/" in doc_id or doc_id in (".", ".."):
            raise ValueError(f"bad document id {doc_id!r}")
        return self.root / kind / f"{doc_id}.json"

    def _write(self, path: Path, body: Any) -> None:
        document = {"checksum": _body_checksum(body), "body": body}
        blob = json.dumps(document, ensure_ascii=False, indent=2, sort_keys=True)
        fd, tmp_name = tempfile.mkstemp(
            dir=path.parent, prefix=path.stem, suffix=".tmp"
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(blob + "\n")
            os.replace(tmp_name, path)
        except BaseException:
            try:
                os.unlink(tmp_name)
            except FileNotFoundError:
                pass
            raise

    def _read(self, path: Path) -> Any:
        try:
            raw = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise NotFoundError(f"no record at {path.name}") from None
        try:
            document = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise CorruptRecordError(f"{path.name}: not valid JSON: {exc}") from None
        if (
            not isinstance(document, dict)
            or "checksum" not in document
            or "body" not in document
        ):
            raise CorruptRecordError(f"{path.name}: missing checksum envelope")
        body = document["body"]
        expected = _body_checksum(body)
        if document["checksum"] != expected:
            raise CorruptRecordError(f"{path.name}: checksum mismatch")
        return body

    def _exists(self, kind: str, doc_id: str) -> bool:
        return self._path(kind, doc_id).exists()

    def _ids(self, kind: str) -> list[str]:
        return sorted(p.stem for p in (self.root / kind).glob("*.json"))

    # -- sessions -----------------------------------------------------------

    def save_session(self, session: Session) -> None:
        body = json.loads(canonical_json(session))
        self._write(self._path("sessions", session.id), body)

    def load_session(self, session_id: str) -> Session:
        body = self._read(self._path("sessions", session_id))
        return Session.model_validate(body)

    def list_sessions(self) -> list[str]:
        return self._ids("sessions")

    # -- journals ------------------------------------------------------------

    def save_journal(self, entry: JournalEntry) -> None:
        path = self._path("journals", entry.id)
        if path.exists():
            raise DuplicateIdError(f"journal {entry.id!r} already stored")
        body = json.loads(canonical_json(entry))
        self._write(path, body)

    def load_journal(self, journal_id: str) -> JournalEntry:
        body = self._read(self._path("journals", journal_id))
        return JournalEntry.model_validate(body)

    def list_journals(
        self,
        profile_id: str | None = None,
        date_from: date | None = None,
        date_to: date | None = None,
    ) -> list[JournalEntry]:
        """All matching entries, newest first (date desc, id desc)."""
        entries = []
        for journal_id in self._ids("journals"):
            entry = self.load_journal(journal_id)
            if profile_id is not None and entry.profile_id != profile_id:
                continue
            if date_from is not None and entry.date < date_from:
                continue
            if date_to is not None and entry.date > date_to:
                continue
            entries.append(entry)
        entries.sort(key=lambda e: (e.date.isoformat(), e.id), reverse=True)
        return entries

    # -- action / input logs ----------------------------------------------------

    def append_actions(self, session_id: str, actions: Iterable[SystemAction]) -> None:
        new = list(actions)
        if not new:
            return
        path = self._path("actions", session_id)
        existing: list[Any] = self._read(path) if path.exists() else []
        dumped = json.loads(_ACTIONS_ADAPTER.dump_json(new).decode("utf-8"))
        self._write(path, existing + dumped)

    def load_actions(self, session_id: str) -> list[SystemAction]:
        path = self._path("actions", session_id)
        if not path.exists():
            return []
        return _ACTIONS_ADAPTER.validate_python(self._read(path))

    def append_inputs(self, session_id: str, inputs: Iterable[UserInput]) -> None:
        new = list(inputs)
        if not new:
            return
        path = self._path("inputs", session_id)
        existing: list[Any] = self._read(path) if path.exists() else []
        dumped = json.loads(_INPUTS_ADAPTER.dump_json(new).decode("utf-8"))
        self._write(path, existing + dumped)

    def load_inputs(self, session_id: str) -> list[UserInput]:
        path = self._path("inputs", session_id)
        if not path.exists():
            return []
        return _INPUTS_ADAPTER.validate_python(self._read(path))

    # -- registry records -------------------------------------------------------
    # Also satisfies the engine's Registry protocol.

    def save_profile(self, profile: AdolescentProfile) -> None:
        body = json.loads(canonical_json(profile))
        self._write(self._path("profiles", profile.id), body)

    def get_profile(self, profile_id: str) -> AdolescentProfile | None:
        if not self._exists("profiles", profile_id):
            return None
        return AdolescentProfile.model_validate(
            self._read(self._path("profiles", profile_id))
        )

    def list_profiles(self) -> list[AdolescentProfile]:
        result = [self.get_profile(i) for i in self._ids("profiles")]
        return [p for p in result if p is not None]

    def save_peer(self, peer: PeerProfile) -> None:
        body = json.loads(canonical_json(peer))
        self._write(self._path("peers", peer.id), body)

    def get_peer(self, peer_id: str) -> PeerProfile | None:
        if not self._exists("peers", peer_id):
            return None
        return PeerProfile.model_validate(self._read(self._path("peers", peer_id)))

    def list_peers(self) -> list[PeerProfile]:
        result = [self.get_peer(i) for i in self._ids("peers")]
        return [p for p in result if p is not None]

    def save_place(self, place: PlaceEntry) -> None:
        for other in self.list_places(place.profile_id):
            if other.id != place.id and other.label == place.label:
                raise DuplicateIdError(
                    f"place label {place.label!r} already used for this profile"
                )
        body = json.loads(canonical_json(place))
        self._write(self._path("places", place.id), body)

    def get_place(self, place_id: str) -> PlaceEntry | None:
        if not self._exists("places", place_id):
            return None
        return PlaceEntry.model_validate(self._read(self._path("places", place_id)))

    def list_places(self, profile_id: str | None = None) -> list[PlaceEntry]:
        result = []
        for place_id in self._ids("places"):
            place = self.get_place(place_id)
            if place is None:
                continue
            if profile_id is not None and place.profile_id != profile_id:
                continue
            result.append(place)
        return result

    def save_person(self, person: PersonEntry) -> None:
        for other in self.list_people(person.profile_id):
            if other.id != person.id and other.label == person.label:
                raise DuplicateIdError(
                    f"person label {person.label!r} already used for this profile"
                )
        body = json.loads(canonical_json(person))
        self._write(self._path("people", person.id), body)

    def get_person(self, person_id: str) -> PersonEntry | None:
        if not self._exists("people", person_id):
            return None
        return PersonEntry.model_validate(self._read(self._path("people", person_id)))

    def list_people(self, profile_id: str | None = None) -> list[PersonEntry]:
        result = []
        for person_id in self._ids("people"):
            person = self.get_person(person_id)
            if person is None:
                continue
            if profile_id is not None and person.profile_id != profile_id:
                continue
            result.append(person)
        return result
