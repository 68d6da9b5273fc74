"""Exceptions shared across modules."""

from __future__ import annotations


class NotFoundError(Exception):
    """A referenced record (profile, peer, place, person, session) is missing."""


class ProtocolError(Exception):
    """Input variant not legal for the session's current phase."""

    def __init__(self, message: str, expected: list[str] | None = None):
        super().__init__(message)
        self.expected = expected or []


class IllegalStateError(Exception):
    """An operation's precondition does not hold."""


class DuplicateIdError(Exception):
    """A record with this id (or unique label) already exists."""


class CorruptRecordError(Exception):
    """A stored record failed its checksum or could not be decoded."""
