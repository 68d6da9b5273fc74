"""Usage metrics over finished sessions.

Definitions (used both for JournalEntry metrics and aggregate stats):

* total duration of a session = last turn timestamp - first turn timestamp,
  in whole seconds;
* a gap between consecutive turns is attributed to the phase of the earlier
  turn, so per-phase durations sum to the total;
* turn counts simply count turns tagged with the phase.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from .models import (
    EntryMetrics,
    Phase,
    PhaseMetrics,
    PromptType,
    Role,
    Session,
)


def entry_metrics(session: Session) -> EntryMetrics:
    turns = session.turns
    per_phase: dict[Phase, PhaseMetrics] = {}
    for turn in turns:
        bucket = per_phase.setdefault(turn.phase, PhaseMetrics())
        bucket.turns += 1
        if turn.role is Role.ADOLESCENT:
            bucket.adolescent_turns += 1
    for earlier, later in zip(turns, turns[1:]):
        gap = int((later.timestamp - earlier.timestamp).total_seconds())
        per_phase[earlier.phase].duration_s += gap
    total = int((turns[-1].timestamp - turns[0].timestamp).total_seconds()) if turns else 0
    return EntryMetrics(
        total_turns=len(turns),
        adolescent_turns=sum(1 for t in turns if t.role is Role.ADOLESCENT),
        system_turns=sum(1 for t in turns if t.role is Role.SYSTEM),
        total_duration_s=total,
        per_phase=per_phase,
        prompt_type=session.prompt_type,
    )


class EntryStats(BaseModel):
    model_config = ConfigDict(extra="forbid")

    session_id: str
    metrics: EntryMetrics


class AggregateStats(BaseModel):
    model_config = ConfigDict(extra="forbid")

    entries: int = 0
    mean_total_turns: float = 0.0
    mean_adolescent_turns: float = 0.0
    mean_system_turns: float = 0.0
    mean_duration_s: float = 0.0
    per_phase_mean_turns: dict[Phase, float] = Field(default_factory=dict)
    per_phase_mean_duration_s: dict[Phase, float] = Field(default_factory=dict)
    # share of entries per prompt type, in percent
    prompt_type_shares: dict[PromptType, float] = Field(default_factory=dict)


class UsageStats(BaseModel):
    model_config = ConfigDict(extra="forbid")

    per_entry: list[EntryStats] = Field(default_factory=list)
    aggregate: AggregateStats = Field(default_factory=AggregateStats)


def compute_usage_stats(sessions: list[Session]) -> UsageStats:
    """Per-entry and aggregate stats; empty input yields explicit zeros."""
    per_entry = [
        EntryStats(session_id=s.id, metrics=entry_metrics(s)) for s in sessions
    ]
    n = len(per_entry)
    if n == 0:
        return UsageStats()

    def mean(values: list[float]) -> float:
        return sum(values) / n

    phases = sorted(
        {phase for e in per_entry for phase in e.metrics.per_phase},
        key=lambda p: list(Phase).index(p),
    )
    per_phase_turns = {
        phase: mean([e.metrics.per_phase.get(phase, PhaseMetrics()).turns for e in per_entry])
        for phase in phases
    }
    per_phase_duration = {
        phase: mean(
            [e.metrics.per_phase.get(phase, PhaseMetrics()).duration_s for e in per_entry]
        )
        for phase in phases
    }
    shares: dict[PromptType, float] = {}
    for e in per_entry:
        if e.metrics.prompt_type is not None:
            shares[e.metrics.prompt_type] = shares.get(e.metrics.prompt_type, 0.0) + 1
    shares = {k: 100.0 * v / n for k, v in shares.items()}

    aggregate = AggregateStats(
        entries=n,
        mean_total_turns=mean([e.metrics.total_turns for e in per_entry]),
        mean_adolescent_turns=mean([e.metrics.adolescent_turns for e in per_entry]),
        mean_system_turns=mean([e.metrics.system_turns for e in per_entry]),
        mean_duration_s=mean([e.metrics.total_duration_s for e in per_entry]),
        per_phase_mean_turns=per_phase_turns,
        per_phase_mean_duration_s=per_phase_duration,
        prompt_type_shares=shares,
    )
    return UsageStats(per_entry=per_entry, aggregate=aggregate)
