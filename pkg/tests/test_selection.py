import random

import pytest

from nvscript.model import Emotion, Session
from nvscript.selection import (
    QuotaConfig,
    audit,
    inject_rare,
    select,
)

SMALL_INVENTORY = frozenset({"k", "a", "i", "dy", "u"})


def test_core_preset_matches_published_quotas():
    core = QuotaConfig.core()
    assert core.total() == 356
    assert core.quotas[(Emotion.ANGER, Session.REGULAR)] == 44
    assert core.quotas[(Emotion.SURPRISE, Session.REGULAR)] == 57
    for emotion in Emotion:
        assert core.quotas[(emotion, Session.PHRASE_FREE)] == 10


def test_extra_preset_matches_published_quotas():
    extra = QuotaConfig.extra()
    assert extra.total() == 158
    assert extra.quotas[(Emotion.HAPPINESS, Session.REGULAR)] == 41
    assert (Emotion.HAPPINESS, Session.PHRASE_FREE) not in extra.quotas


def test_scaled_preset_keeps_minimum_one():
    scaled = QuotaConfig.core().scaled(10)
    assert scaled.quotas[(Emotion.ANGER, Session.REGULAR)] == 4
    assert scaled.quotas[(Emotion.SURPRISE, Session.REGULAR)] == 5
    assert scaled.quotas[(Emotion.ANGER, Session.PHRASE_FREE)] == 1


def _quota(count=2, emotion=Emotion.HAPPINESS, session=Session.PHRASE_FREE):
    return QuotaConfig(name="tiny", quotas={(emotion, session): count})


def test_select_takes_top_scores(make_script):
    scripts = [
        make_script("かきくけこ", combined=2.0),
        make_script("さしすせそ", combined=1.5),
        make_script("たちつてと", combined=1.0),
    ]
    plan = select(scripts, _quota(2), inventory=SMALL_INVENTORY)
    chosen = plan.selected[(Emotion.HAPPINESS, Session.PHRASE_FREE)]
    assert [s.combined_score for s in chosen] == [2.0, 1.5]
    assert plan.feasible
    assert len(plan.leftover) == 1


def test_select_marks_infeasible_with_deficit(make_script):
    scripts = [
        make_script(text, combined=1.0)
        for text in ("かきく", "かきけ", "かきこ")
    ]
    plan = select(scripts, _quota(5), inventory=SMALL_INVENTORY)
    assert not plan.feasible
    assert plan.deficits[(Emotion.HAPPINESS, Session.PHRASE_FREE)] == 2


def test_select_breaks_ties_by_ascending_id(make_script):
    a = make_script("かきくけこ", combined=1.5)
    b = make_script("さしすせそ", combined=1.5)
    plan = select([a, b], _quota(1), inventory=SMALL_INVENTORY)
    chosen = plan.selected[(Emotion.HAPPINESS, Session.PHRASE_FREE)]
    assert chosen[0].id == min(a.id, b.id)


def test_select_requires_scored_candidates(make_script):
    with pytest.raises(ValueError, match="without combined score"):
        select([make_script("かき")], _quota(1))


def test_select_is_deterministic_under_input_order(make_script):
    rng = random.Random(5)
    scripts = [
        make_script(
            "".join(rng.choice("かきくけこさしすせそ") for _ in range(6)),
            emotion=rng.choice(list(Emotion)),
            session=Session.PHRASE_FREE,
            combined=rng.random() * 2,
        )
        for _ in range(40)
    ]
    quotas = QuotaConfig(
        name="t", quotas={(e, Session.PHRASE_FREE): 3 for e in Emotion}
    )
    base = select(scripts, quotas, inventory=SMALL_INVENTORY)
    for _ in range(5):
        shuffled = scripts[:]
        rng.shuffle(shuffled)
        again = select(shuffled, quotas, inventory=SMALL_INVENTORY)
        assert {b: tuple(s.id for s in v) for b, v in again.selected.items()} == {
            b: tuple(s.id for s in v) for b, v in base.selected.items()
        }


def test_inject_rare_fills_gap(make_script):
    selected_hi = make_script("かきかき", combined=1.8)  # k a k i k a k i
    selected_lo = make_script("あい", combined=1.0)  # a i, covered elsewhere
    filler = make_script("デュ", combined=0.5)  # dy u
    plan = select([selected_hi, selected_lo], _quota(2), inventory=SMALL_INVENTORY)
    assert set(plan.coverage.gaps_after) == {"dy", "u"}

    injected = inject_rare(plan, [filler], inventory=SMALL_INVENTORY)
    assert injected.coverage.gaps_after == ()
    assert injected.injected == (filler.id,)
    assert injected.displaced == (selected_lo.id,)
    bucket = injected.selected[(Emotion.HAPPINESS, Session.PHRASE_FREE)]
    assert len(bucket) == 2  # size unchanged
    assert {s.id for s in bucket} == {selected_hi.id, filler.id}


def test_inject_rare_with_zero_gaps_is_identity(make_script):
    scripts = [make_script("かきデュ", combined=1.5), make_script("あい", combined=1.2)]
    plan = select(scripts, _quota(2), inventory=frozenset({"k", "a", "i", "dy"}))
    assert plan.coverage.gaps_after == ()
    out = inject_rare(plan, [make_script("デュデュ", combined=0.4)], inventory=frozenset({"k", "a", "i", "dy"}))
    assert out.selected == plan.selected
    assert out.injected == ()


def test_inject_rare_without_covering_filler_reports_gap(make_script):
    plan = select([make_script("かき", combined=1.5)], _quota(1), inventory=SMALL_INVENTORY)
    out = inject_rare(plan, [make_script("あい", combined=0.9)], inventory=SMALL_INVENTORY)
    assert out.selected == plan.selected
    assert "dy" in out.coverage.gaps_after


def test_inject_rare_respects_max_injections(make_script):
    plan = select([make_script("かき", combined=1.5)], _quota(1), inventory=SMALL_INVENTORY)
    out = inject_rare(plan, [make_script("デュ", combined=0.9)], max_injections=0, inventory=SMALL_INVENTORY)
    assert out.injected == ()


def test_inject_rare_never_grows_gap_set(make_script):
    # the only k-covering script must not be evicted to gain dy
    only_k = make_script("かかか", combined=1.0)
    covers_ai = make_script("あいあい", combined=1.8)
    filler = make_script("デュ", combined=0.5)
    plan = select([only_k, covers_ai], _quota(2), inventory=SMALL_INVENTORY)
    out = inject_rare(plan, [filler], inventory=SMALL_INVENTORY)
    assert set(out.coverage.gaps_after) <= set(plan.coverage.gaps_after)
    # k must still be covered even though only_k was the lowest-scoring script
    assert "k" not in out.coverage.gaps_after


def test_audit_clean_plan_reports_nothing(make_script):
    scripts = [
        make_script("かきくけこ", combined=1.9),
        make_script("さしすせそ", combined=1.4),
        make_script("たちつてと", combined=0.9),
    ]
    plan = select(scripts, _quota(2), inventory=SMALL_INVENTORY)
    assert audit(plan, scripts, inventory=SMALL_INVENTORY) == []


def test_audit_detects_missing_selection(make_script):
    scripts = [make_script("かきくけこ", combined=1.9), make_script("さしすせそ", combined=1.4)]
    plan = select(scripts, _quota(2), inventory=SMALL_INVENTORY)
    bucket = (Emotion.HAPPINESS, Session.PHRASE_FREE)
    broken = plan.selected.copy()
    broken[bucket] = broken[bucket][:1]
    import dataclasses

    tampered = dataclasses.replace(plan, selected=broken)
    violations = audit(tampered, scripts, inventory=SMALL_INVENTORY)
    assert any("quota violation" in v for v in violations)


def test_audit_detects_ordering_violation(make_script):
    low = make_script("かきくけこ", combined=0.5)
    high = make_script("さしすせそ", combined=1.9)
    plan = select([low, high], _quota(1), inventory=SMALL_INVENTORY)
    import dataclasses

    bucket = (Emotion.HAPPINESS, Session.PHRASE_FREE)
    tampered = dataclasses.replace(plan, selected={bucket: (low,)})
    violations = audit(tampered, [low, high], inventory=SMALL_INVENTORY)
    assert any("ordering violation" in v for v in violations)


def test_audit_detects_preset_overlap(make_script):
    scripts = [make_script("かきくけこ", combined=1.9), make_script("さしすせそ", combined=1.4)]
    plan_a = select(scripts, _quota(1), inventory=SMALL_INVENTORY)
    plan_b = select(scripts, _quota(1), inventory=SMALL_INVENTORY)  # same top pick
    violations = audit(plan_a, scripts, other_plans=[plan_b], inventory=SMALL_INVENTORY)
    assert any("overlap" in v for v in violations)


def test_disjoint_core_extra_selection_flow(make_script):
    rng = random.Random(11)
    pool = []
    for emotion in Emotion:
        for i in range(4):
            pool.append(
                make_script(
                    "".join(rng.choice("かきくけこさしすせそなにぬねの") for _ in range(8)),
                    emotion=emotion,
                    session=Session.PHRASE_FREE,
                    combined=rng.random() * 2,
                )
            )
    q = QuotaConfig(name="core-ish", quotas={(e, Session.PHRASE_FREE): 2 for e in Emotion})
    first = select(pool, q, inventory=SMALL_INVENTORY)
    remaining = [s for s in pool if s.id not in first.selected_ids()]
    q2 = QuotaConfig(name="extra-ish", quotas={(e, Session.PHRASE_FREE): 1 for e in Emotion})
    second = select(remaining, q2, inventory=SMALL_INVENTORY)
    assert first.selected_ids().isdisjoint(second.selected_ids())
    assert audit(first, pool, other_plans=[second], inventory=SMALL_INVENTORY) == []
    assert audit(second, remaining, other_plans=[first], inventory=SMALL_INVENTORY) == []
