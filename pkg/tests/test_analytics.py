from __future__ import annotations

from datetime import timedelta

import pytest

from comicjournal.analytics import compute_usage_stats, entry_metrics
from comicjournal.models import (
    Modality,
    Phase,
    PromptType,
    Role,
    Session,
    Turn,
)
from conftest import CLOCK_START


def build_session(
    session_id: str,
    turn_specs: list[tuple[Role, Phase, int]],
    prompt_type: PromptType | None = None,
) -> Session:
    turns = [
        Turn(
            role=role,
            text=f"turn {i}",
            phase=phase,
            modality=Modality.TYPED,
            timestamp=CLOCK_START + timedelta(seconds=offset),
        )
        for i, (role, phase, offset) in enumerate(turn_specs)
    ]
    return Session(
        id=session_id,
        profile_id="adol-ethan",
        peer_id="peer-milo",
        created_at=CLOCK_START,
        prompt_type=prompt_type,
        turns=turns,
    )


SYS = Role.SYSTEM
ADOL = Role.ADOLESCENT
PREP = Phase.PREPARATION
ART = Phase.ARTICULATION
VER = Phase.VERIFICATION


class TestEntryMetrics:
    def test_hand_computed_two_phases(self):
        session = build_session(
            "s1",
            [(SYS, PREP, 0), (ADOL, PREP, 2), (SYS, ART, 5), (ADOL, ART, 9)],
            prompt_type=PromptType.OPEN_ENDED,
        )
        m = entry_metrics(session)
        assert m.total_turns == 4
        assert m.adolescent_turns == 2
        assert m.system_turns == 2
        assert m.total_duration_s == 9
        assert m.per_phase[PREP].turns == 2
        assert m.per_phase[PREP].adolescent_turns == 1
        # gap 0->2 and gap 2->5 both belong to preparation
        assert m.per_phase[PREP].duration_s == 5
        assert m.per_phase[ART].duration_s == 4
        assert m.prompt_type is PromptType.OPEN_ENDED

    def test_phase_durations_sum_to_total(self):
        session = build_session(
            "s1",
            [(SYS, PREP, 0), (SYS, ART, 7), (SYS, VER, 11), (SYS, VER, 30)],
        )
        m = entry_metrics(session)
        assert sum(p.duration_s for p in m.per_phase.values()) == m.total_duration_s == 30

    def test_single_turn(self):
        session = build_session("s1", [(SYS, PREP, 0)])
        m = entry_metrics(session)
        assert m.total_turns == 1
        assert m.total_duration_s == 0
        assert m.per_phase[PREP].duration_s == 0

    def test_no_turns(self):
        session = build_session("s1", [])
        m = entry_metrics(session)
        assert m.total_turns == 0
        assert m.total_duration_s == 0
        assert m.per_phase == {}

    def test_subsecond_gaps_truncate(self):
        session = build_session("s1", [(SYS, PREP, 0), (SYS, PREP, 0)])
        session.turns[1].timestamp += timedelta(milliseconds=900)
        m = entry_metrics(session)
        assert m.total_duration_s == 0


class TestAggregate:
    def sessions(self) -> list[Session]:
        a = build_session(
            "s-a",
            [(SYS, PREP, 0), (ADOL, PREP, 4), (SYS, ART, 10)],
            prompt_type=PromptType.PLACE_PEOPLE_SELECTION,
        )
        b = build_session(
            "s-b",
            [(SYS, PREP, 0), (SYS, VER, 20)],
            prompt_type=PromptType.PLACE_PEOPLE_SELECTION,
        )
        c = build_session(
            "s-c",
            [(ADOL, ART, 0), (ADOL, ART, 2), (ADOL, ART, 4), (SYS, ART, 6)],
            prompt_type=PromptType.OPEN_ENDED,
        )
        return [a, b, c]

    def test_means(self):
        stats = compute_usage_stats(self.sessions())
        agg = stats.aggregate
        assert agg.entries == 3
        assert agg.mean_total_turns == pytest.approx(3.0)  # (3 + 2 + 4) / 3
        assert agg.mean_adolescent_turns == pytest.approx(4 / 3)
        assert agg.mean_system_turns == pytest.approx(5 / 3)
        assert agg.mean_duration_s == pytest.approx(12.0)  # (10 + 20 + 6) / 3

    def test_per_phase_means_count_missing_phases_as_zero(self):
        stats = compute_usage_stats(self.sessions())
        agg = stats.aggregate
        # preparation turns: 2, 1, 0
        assert agg.per_phase_mean_turns[PREP] == pytest.approx(1.0)
        # articulation turns: 1, 0, 4
        assert agg.per_phase_mean_turns[ART] == pytest.approx(5 / 3)
        # verification durations: 0, 0, 0 (phase of the *earlier* turn owns the gap)
        assert agg.per_phase_mean_duration_s[VER] == pytest.approx(0.0)
        # preparation durations: 10, 20, 0
        assert agg.per_phase_mean_duration_s[PREP] == pytest.approx(10.0)

    def test_prompt_type_shares_in_percent(self):
        stats = compute_usage_stats(self.sessions())
        shares = stats.aggregate.prompt_type_shares
        assert shares[PromptType.PLACE_PEOPLE_SELECTION] == pytest.approx(200 / 3)
        assert shares[PromptType.OPEN_ENDED] == pytest.approx(100 / 3)
        assert sum(shares.values()) == pytest.approx(100.0)

    def test_sessions_without_prompt_type_excluded_from_shares(self):
        stats = compute_usage_stats([build_session("s1", [(SYS, PREP, 0)])])
        assert stats.aggregate.prompt_type_shares == {}

    def test_single_session_aggregate_equals_entry(self):
        session = self.sessions()[0]
        stats = compute_usage_stats([session])
        m = entry_metrics(session)
        agg = stats.aggregate
        assert agg.mean_total_turns == m.total_turns
        assert agg.mean_duration_s == m.total_duration_s
        assert agg.per_phase_mean_turns == {
            phase: float(pm.turns) for phase, pm in m.per_phase.items()
        }
        assert stats.per_entry[0].session_id == session.id
        assert stats.per_entry[0].metrics == m

    def test_empty_input_yields_zeros(self):
        stats = compute_usage_stats([])
        assert stats.per_entry == []
        assert stats.aggregate.entries == 0
        assert stats.aggregate.mean_total_turns == 0.0
        assert stats.aggregate.per_phase_mean_turns == {}
        assert stats.aggregate.prompt_type_shares == {}

    def test_phase_keys_in_machine_order(self):
        stats = compute_usage_stats(self.sessions())
        keys = list(stats.aggregate.per_phase_mean_turns)
        order = list(Phase)
        assert keys == sorted(keys, key=order.index)
