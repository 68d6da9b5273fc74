"""Command-line entry points.

``replay`` is the workhorse: it drives a full conversation from a JSON
script (fixtures, scripted provider responses, the input sequence) with
a fixed clock and serial ids, so two runs of the same script produce
byte-identical output.  That is what golden tests diff against.
"""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import analytics, svg
from .config import build_gateway, load_config
from .engine import InMemoryRegistry, JournalEngine, SerialIdFactory, TickingClock
from .gateway import Gateway, ProviderConfig, ScriptedMockProvider
from .models import (
    SLOT_ORDER,
    AdolescentProfile,
    JournalEntry,
    PeerProfile,
    PersonEntry,
    Phase,
    PlaceEntry,
    SceneDocument,
    Session,
    pretty_json,
    to_jsonable,
)
from .models import validate as validate_session
from .storage import FileStore

DEFAULT_REPLAY_START = "2026-01-05T09:00:00+00:00"


@click.group()
def main() -> None:
    """Guided journaling engine: four-panel comics from short conversations."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--host", default=None, help="Override the configured bind host.")
@click.option("--port", type=int, default=None, help="Override the configured port.")
def serve(config_path: str | None, host: str | None, port: int | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .api import create_app

    config = load_config(config_path)
    if host is not None:
        config.host = host
    if port is not None:
        config.port = port
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)


def _registry_from_script(document: dict) -> tuple[InMemoryRegistry, str, str]:
    registry = InMemoryRegistry()
    profile = AdolescentProfile.model_validate(document["profile"])
    peer = PeerProfile.model_validate(document["peer"])
    registry.profiles[profile.id] = profile
    registry.peers[peer.id] = peer
    for raw in document.get("places", []):
        place = PlaceEntry.model_validate(raw)
        registry.places[place.id] = place
    for raw in document.get("people", []):
        person = PersonEntry.model_validate(raw)
        registry.people[person.id] = person
    return registry, profile.id, peer.id


def run_replay(document: dict, script_dir: Path) -> tuple[Session, JournalEntry | None, list]:
    """Drive the engine through a replay script; returns the final session,
    the journal entry when the run finalized, and all emitted actions."""
    registry, profile_id, peer_id = _registry_from_script(document)

    if "mock_script" in document:
        provider = ScriptedMockProvider(document["mock_script"])
    elif "mock_script_path" in document:
        provider = ScriptedMockProvider.from_file(
            script_dir / document["mock_script_path"]
        )
    else:
        raise click.ClickException("replay script needs mock_script or mock_script_path")

    clock_spec = document.get("fixed_clock", {})
    start = datetime.fromisoformat(clock_spec.get("start", DEFAULT_REPLAY_START))
    if start.tzinfo is None:
        start = start.replace(tzinfo=timezone.utc)
    clock = TickingClock(start=start, step_s=int(clock_spec.get("step_s", 5)))

    journals: list[JournalEntry] = []
    engine = JournalEngine(
        Gateway(provider, ProviderConfig()),
        registry,
        clock=clock,
        id_factory=SerialIdFactory("s"),
        journal_sink=journals.append,
    )

    from pydantic import TypeAdapter

    from .models import UserInput

    input_adapter: TypeAdapter = TypeAdapter(UserInput)
    session, actions = engine.create_session(profile_id, peer_id)
    all_actions = list(actions)
    for position, raw in enumerate(document.get("inputs", []), start=1):
        user_input = input_adapter.validate_python(raw)
        before = session.phase
        session, actions = engine.handle_input(session, user_input)
        all_actions.extend(actions)
        if actions and actions[0].kind == "error_notice":
            raise click.ClickException(
                f"input {position} ({user_input.kind}) failed at a model stage"
            )
        if session.phase is not before:
            click.echo(f"  [{position}] {before.value} -> {session.phase.value}")
    journal = journals[0] if journals else None
    return session, journal, all_actions


def _replay_document(session: Session, journal: JournalEntry | None) -> str:
    return pretty_json(
        {
            "journal": to_jsonable(journal) if journal is not None else None,
            "session": to_jsonable(session),
        }
    )


@main.command()
@click.argument("script", type=click.Path(exists=True, dir_okay=False))
@click.option("--golden", "golden_out", type=click.Path(), default=None,
              help="Write the deterministic replay document here.")
@click.option("--verify", "verify_path", type=click.Path(exists=True), default=None,
              help="Compare the replay document against this golden file.")
@click.option("--data-dir", type=click.Path(), default=None,
              help="Also persist the session and journal into this store.")
def replay(script: str, golden_out: str | None, verify_path: str | None,
           data_dir: str | None) -> None:
    """Replay a scripted conversation deterministically."""
    script_path = Path(script)
    document = json.loads(script_path.read_text(encoding="utf-8"))
    session, journal, actions = run_replay(document, script_path.parent)

    problems = validate_session(session)
    if problems:
        raise click.ClickException("invariant violations: " + "; ".join(problems))

    click.echo(f"session {session.id}: phase={session.phase.value} "
               f"turns={len(session.turns)} actions={len(actions)}")
    if journal is not None:
        click.echo(f"journal {journal.id}: {journal.title!r} ({journal.date})")

    if data_dir is not None:
        store = FileStore(data_dir)
        registry, _, _ = _registry_from_script(document)
        for profile in registry.profiles.values():
            store.save_profile(profile)
        for peer in registry.peers.values():
            store.save_peer(peer)
        for place in registry.places.values():
            store.save_place(place)
        for person in registry.people.values():
            store.save_person(person)
        store.save_session(session)
        if journal is not None:
            store.save_journal(journal)
        click.echo(f"persisted to {data_dir}")

    rendered = _replay_document(session, journal)
    if golden_out is not None:
        Path(golden_out).write_text(rendered, encoding="utf-8")
        click.echo(f"golden written to {golden_out}")
    if verify_path is not None:
        expected = Path(verify_path).read_text(encoding="utf-8")
        if rendered != expected:
            click.echo("golden mismatch", err=True)
            sys.exit(2)
        click.echo("golden verified")


@main.command()
@click.argument("journal_id")
@click.option("--data-dir", type=click.Path(exists=True), required=True)
@click.option("--svg", "as_svg", is_flag=True, help="Export the strip as SVG.")
@click.option("-o", "--out", type=click.Path(), default=None)
def export(journal_id: str, data_dir: str, as_svg: bool, out: str | None) -> None:
    """Export a stored journal entry as JSON (default) or SVG."""
    store = FileStore(data_dir)
    entry = store.load_journal(journal_id)
    if as_svg:
        scenes: dict = {slot: entry.panels[slot].scene for slot in SLOT_ORDER}
        captions = {
            slot: " ".join(entry.panels[slot].description.sentences)
            for slot in SLOT_ORDER
        }
        rendered = svg.render_strip(scenes, captions)
        default_name = f"{journal_id}.svg"
    else:
        rendered = pretty_json(entry)
        default_name = f"{journal_id}.json"
    target = Path(out) if out is not None else Path(default_name)
    target.write_text(rendered, encoding="utf-8")
    click.echo(f"wrote {target}")


@main.command()
@click.argument("profile_id")
@click.option("--data-dir", type=click.Path(exists=True), required=True)
def stats(profile_id: str, data_dir: str) -> None:
    """Print usage statistics for a profile's finalized sessions."""
    store = FileStore(data_dir)
    sessions = []
    for entry in store.list_journals(profile_id=profile_id):
        try:
            session = store.load_session(entry.session_id)
        except Exception:
            continue
        if session.phase is Phase.FINALIZED:
            sessions.append(session)
    usage = analytics.compute_usage_stats(sessions)
    click.echo(pretty_json(usage), nl=False)


@main.command("render-scene")
@click.argument("scene_file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", type=click.Path(), required=True)
def render_scene_command(scene_file: str, out: str) -> None:
    """Render a scene document JSON file to SVG."""
    document = json.loads(Path(scene_file).read_text(encoding="utf-8"))
    scene = SceneDocument.model_validate(document)
    Path(out).write_text(svg.render_scene(scene), encoding="utf-8")
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
