from __future__ import annotations

from datetime import datetime, timezone

import pytest

from comicjournal.engine import (
    InMemoryRegistry,
    JournalEngine,
    SerialIdFactory,
    TickingClock,
)
from comicjournal.gateway import (
    Gateway,
    ProviderConfig,
    ScriptedMockProvider,
    TemplateRegistry,
    load_ui_strings,
)
from comicjournal.models import (
    AdolescentProfile,
    PeerProfile,
    PersonCategory,
    PersonEntry,
    PlaceEntry,
)

CLOCK_START = datetime(2026, 2, 2, 10, 0, 0, tzinfo=timezone.utc)


@pytest.fixture(scope="session")
def templates() -> TemplateRegistry:
    return TemplateRegistry(locale="en")


@pytest.fixture(scope="session")
def ui() -> dict[str, str]:
    return load_ui_strings("en")


@pytest.fixture
def registry() -> InMemoryRegistry:
    reg = InMemoryRegistry()
    reg.profiles["adol-ethan"] = AdolescentProfile(
        id="adol-ethan", name="Ethan", age=13, gender="male",
        interests=["soccer", "video games"],
    )
    reg.peers["peer-milo"] = PeerProfile(
        id="peer-milo", name="Milo", voice_id="voice-milo-1"
    )
    reg.places["place-school"] = PlaceEntry(
        id="place-school", profile_id="adol-ethan", label="School", category="school"
    )
    reg.places["place-park"] = PlaceEntry(
        id="place-park", profile_id="adol-ethan", label="Park", category="outdoors"
    )
    reg.people["person-oliver"] = PersonEntry(
        id="person-oliver", profile_id="adol-ethan", label="Oliver",
        category=PersonCategory.FRIEND,
    )
    reg.people["person-mia"] = PersonEntry(
        id="person-mia", profile_id="adol-ethan", label="Mia",
        category=PersonCategory.FRIEND,
    )
    return reg


@pytest.fixture
def make_engine(registry, templates):
    """Engine factory with a ticking clock and serial ids, so every test
    run is deterministic."""

    def build(
        provider,
        *,
        step_s: int = 1,
        max_repair_retries: int = 1,
        tts_enabled: bool = False,
        journal_sink=None,
        reg=None,
    ) -> JournalEngine:
        gateway = Gateway(
            provider, ProviderConfig(max_repair_retries=max_repair_retries)
        )
        return JournalEngine(
            gateway,
            reg if reg is not None else registry,
            templates=templates,
            clock=TickingClock(start=CLOCK_START, step_s=step_s),
            id_factory=SerialIdFactory("t"),
            journal_sink=journal_sink,
            tts_enabled=tts_enabled,
        )

    return build


@pytest.fixture
def scripted_engine(make_engine):
    """(engine, provider) pair for a given script dict."""

    def build(script: dict, **kw):
        provider = ScriptedMockProvider(script)
        return make_engine(provider, **kw), provider

    return build
