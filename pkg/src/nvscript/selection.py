"""Quota-constrained top-k script selection with rare-phoneme injection."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .model import Emotion, Script, Session
from .phoneme import (
    INVENTORY,
    EntropyConfig,
    KanaParseError,
    count_ngrams,
    coverage_gaps,
    extended_entropy,
    kana_to_phonemes,
    phone_set,
)

Bucket = tuple[Emotion, Session]

CORE_REGULAR = {
    Emotion.ANGER: 44,
    Emotion.DISGUST: 49,
    Emotion.FEAR: 49,
    Emotion.HAPPINESS: 48,
    Emotion.SADNESS: 49,
    Emotion.SURPRISE: 57,
}
CORE_PHRASE_FREE_PER_EMOTION = 10
EXTRA_REGULAR = {
    Emotion.ANGER: 22,
    Emotion.DISGUST: 15,
    Emotion.FEAR: 28,
    Emotion.HAPPINESS: 41,
    Emotion.SADNESS: 14,
    Emotion.SURPRISE: 38,
}


@dataclass(frozen=True)
class QuotaConfig:
    name: str
    quotas: dict[Bucket, int]

    def __post_init__(self) -> None:
        for bucket, count in self.quotas.items():
            if count < 0:
                raise ValueError(f"negative quota for {bucket}")

    def total(self) -> int:
        return sum(self.quotas.values())

    def scaled(self, divisor: int) -> "QuotaConfig":
        """Shrink every quota by an integer divisor, keeping each at >= 1."""
        if divisor < 1:
            raise ValueError("divisor must be >= 1")
        return QuotaConfig(
            name=f"{self.name}/{divisor}",
            quotas={b: max(1, c // divisor) for b, c in self.quotas.items()},
        )

    @classmethod
    def core(cls) -> "QuotaConfig":
        quotas: dict[Bucket, int] = {}
        for emotion, count in CORE_REGULAR.items():
            quotas[(emotion, Session.REGULAR)] = count
        for emotion in Emotion:
            quotas[(emotion, Session.PHRASE_FREE)] = CORE_PHRASE_FREE_PER_EMOTION
        return cls(name="core", quotas=quotas)

    @classmethod
    def extra(cls) -> "QuotaConfig":
        return cls(
            name="extra",
            quotas={(e, Session.REGULAR): c for e, c in EXTRA_REGULAR.items()},
        )

    @classmethod
    def preset(cls, name: str) -> "QuotaConfig":
        if name == "core":
            return cls.core()
        if name == "extra":
            return cls.extra()
        raise ValueError(f"unknown quota preset {name!r}")


@dataclass(frozen=True)
class CoverageReport:
    entropy_before: float
    entropy_after: float
    gaps_before: tuple[str, ...]
    gaps_after: tuple[str, ...]
    unparsed: tuple[str, ...] = ()


@dataclass(frozen=True)
class SelectionPlan:
    quota_name: str
    quotas: dict[Bucket, int]
    selected: dict[Bucket, tuple[Script, ...]]
    leftover: tuple[Script, ...]
    deficits: dict[Bucket, int]
    feasible: bool
    coverage: CoverageReport
    displaced: tuple[str, ...] = ()
    injected: tuple[str, ...] = ()

    def selected_scripts(self) -> list[Script]:
        out: list[Script] = []
        for bucket in sorted(self.selected, key=_bucket_key):
            out.extend(self.selected[bucket])
        return out

    def selected_ids(self) -> set[str]:
        return {s.id for s in self.selected_scripts()}


def _bucket_key(bucket: Bucket) -> tuple[str, str]:
    return (bucket[0].value, bucket[1].value)


def _rank_key(script: Script) -> tuple[float, str]:
    return (-script.combined_score, script.id)


def _coverage(
    scripts: list[Script],
    cfg: EntropyConfig,
    inventory: frozenset[str] | set[str] = INVENTORY,
) -> tuple[float, tuple[str, ...], tuple[str, ...]]:
    """(entropy, gaps, ids that failed phonemization)."""
    seqs = []
    unparsed = []
    for s in scripts:
        try:
            seqs.append(kana_to_phonemes(s.text, source_script_id=s.id))
        except KanaParseError:
            unparsed.append(s.id)
    stats = count_ngrams(seqs, cfg.max_order)
    return extended_entropy(stats, cfg), coverage_gaps(stats, inventory), tuple(unparsed)


def select(
    candidates: list[Script],
    quotas: QuotaConfig,
    entropy_cfg: EntropyConfig | None = None,
    inventory: frozenset[str] | set[str] = INVENTORY,
) -> SelectionPlan:
    """Pick the top-quota scripts per (emotion, session) bucket.

    Ordering is combined score descending with ties broken by ascending id,
    so the plan is deterministic for any input order. A bucket smaller than
    its quota marks the plan infeasible; the deficit is recorded rather
    than raised so a pipeline can loop back to generation.
    """
    if entropy_cfg is None:
        entropy_cfg = EntropyConfig()
    unscored = [c.id for c in candidates if c.combined_score is None]
    if unscored:
        raise ValueError(f"candidates without combined score: {sorted(unscored)[:5]}")

    by_bucket: dict[Bucket, list[Script]] = {}
    for c in candidates:
        by_bucket.setdefault((c.emotion, c.session), []).append(c)

    selected: dict[Bucket, tuple[Script, ...]] = {}
    deficits: dict[Bucket, int] = {}
    taken_ids: set[str] = set()
    for bucket in sorted(quotas.quotas, key=_bucket_key):
        quota = quotas.quotas[bucket]
        ranked = sorted(by_bucket.get(bucket, []), key=_rank_key)
        chosen = tuple(ranked[:quota])
        selected[bucket] = chosen
        deficits[bucket] = max(0, quota - len(chosen))
        taken_ids.update(s.id for s in chosen)

    leftover = tuple(
        sorted(
            (c for c in candidates if c.id not in taken_ids),
            key=lambda c: (_bucket_key((c.emotion, c.session)), _rank_key(c)),
        )
    )
    chosen_all = [s for bucket in sorted(selected, key=_bucket_key) for s in selected[bucket]]
    entropy, gaps, unparsed = _coverage(chosen_all, entropy_cfg, inventory)
    return SelectionPlan(
        quota_name=quotas.name,
        quotas=dict(quotas.quotas),
        selected=selected,
        leftover=leftover,
        deficits=deficits,
        feasible=all(d == 0 for d in deficits.values()),
        coverage=CoverageReport(
            entropy_before=entropy,
            entropy_after=entropy,
            gaps_before=gaps,
            gaps_after=gaps,
            unparsed=unparsed,
        ),
    )


def _phones_of(script: Script) -> frozenset[str]:
    return phone_set(script.text)


def inject_rare(
    plan: SelectionPlan,
    gap_fillers: list[Script],
    max_injections: int = 5,
    entropy_cfg: EntropyConfig | None = None,
    inventory: frozenset[str] | set[str] = INVENTORY,
) -> SelectionPlan:
    """Swap gap-covering fillers into the plan, at most max_injections times.

    For each uncovered phoneme, the highest-scoring phrase-free filler
    containing it replaces the lowest-scoring selected script of the
    filler's bucket whose removal does not uncover another phoneme. Gaps
    that no filler covers stay in the report; the gap set never grows and
    bucket sizes never change.
    """
    if max_injections < 0:
        raise ValueError("max_injections must be >= 0")
    if entropy_cfg is None:
        entropy_cfg = EntropyConfig()
    for f in gap_fillers:
        if f.session is not Session.PHRASE_FREE:
            raise ValueError(f"gap filler {f.id} is not phrase-free")
        if f.combined_score is None:
            raise ValueError(f"gap filler {f.id} is not scored")

    selected = {b: list(scripts) for b, scripts in plan.selected.items()}
    displaced = list(plan.displaced)
    injected = list(plan.injected)
    used_fillers = {s.id for scripts in selected.values() for s in scripts}
    tracked = set(inventory)
    swaps = 0

    def phone_union(exclude_id: str | None = None, extra: Script | None = None) -> set[str]:
        union: set[str] = set()
        for scripts in selected.values():
            for s in scripts:
                if s.id != exclude_id:
                    union |= _phones_of(s)
        if extra is not None:
            union |= _phones_of(extra)
        return union

    for gap in plan.coverage.gaps_after:
        if swaps >= max_injections:
            break
        if gap in phone_union():
            continue
        covering = sorted(
            (f for f in gap_fillers if f.id not in used_fillers and gap in _phones_of(f)),
            key=_rank_key,
        )
        swapped = False
        for filler in covering:
            bucket = (filler.emotion, Session.PHRASE_FREE)
            pool = selected.get(bucket)
            if not pool:
                continue
            evictable = sorted(
                (s for s in pool if s.id not in injected),
                key=_rank_key,
                reverse=True,
            )
            for victim in evictable:
                after = phone_union(exclude_id=victim.id, extra=filler)
                before = phone_union()
                if (before - after) & tracked:
                    continue  # removal would uncover a tracked phoneme
                pool.remove(victim)
                pool.append(filler)
                pool.sort(key=_rank_key)
                displaced.append(victim.id)
                injected.append(filler.id)
                used_fillers.add(filler.id)
                swaps += 1
                swapped = True
                break
            if swapped:
                break

    chosen_all = [s for b in sorted(selected, key=_bucket_key) for s in selected[b]]
    entropy_after, gaps_after, unparsed = _coverage(chosen_all, entropy_cfg, inventory)
    return dataclasses.replace(
        plan,
        selected={b: tuple(scripts) for b, scripts in selected.items()},
        displaced=tuple(displaced),
        injected=tuple(injected),
        coverage=dataclasses.replace(
            plan.coverage,
            entropy_after=entropy_after,
            gaps_after=gaps_after,
            unparsed=unparsed,
        ),
    )


def audit(
    plan: SelectionPlan,
    candidates: list[Script],
    other_plans: list[SelectionPlan] | None = None,
    entropy_cfg: EntropyConfig | None = None,
    inventory: frozenset[str] | set[str] = INVENTORY,
) -> list[str]:
    """Re-verify the plan from scratch; every violation is reported."""
    if entropy_cfg is None:
        entropy_cfg = EntropyConfig()
    violations: list[str] = []
    displaced = set(plan.displaced)
    injected = set(plan.injected)

    for bucket in sorted(plan.quotas, key=_bucket_key):
        quota = plan.quotas[bucket]
        chosen = plan.selected.get(bucket, ())
        deficit = plan.deficits.get(bucket, 0)
        if len(chosen) + deficit != quota:
            violations.append(
                f"quota violation in {bucket[0].value}/{bucket[1].value}: "
                f"{len(chosen)} selected + {deficit} deficit != {quota}"
            )
        if deficit > 0 and plan.feasible:
            violations.append("plan marked feasible despite deficits")

        selected_ids = {s.id for s in chosen}
        pool = [
            c
            for c in candidates
            if (c.emotion, c.session) == bucket and c.id not in selected_ids
        ]
        comparable_selected = [s for s in chosen if s.id not in injected]
        comparable_pool = [c for c in pool if c.id not in displaced]
        if comparable_selected and comparable_pool:
            worst_selected = min(s.combined_score for s in comparable_selected)
            best_unselected = max(c.combined_score for c in comparable_pool)
            if best_unselected > worst_selected + 1e-12:
                violations.append(
                    f"ordering violation in {bucket[0].value}/{bucket[1].value}: "
                    f"unselected {best_unselected} > selected {worst_selected}"
                )

    selected_ids = plan.selected_ids()
    for other in other_plans or []:
        overlap = selected_ids & other.selected_ids()
        if overlap:
            violations.append(
                f"plans {plan.quota_name} and {other.quota_name} overlap: "
                f"{sorted(overlap)[:5]}"
            )

    entropy, gaps, _ = _coverage(plan.selected_scripts(), entropy_cfg, inventory)
    if abs(entropy - plan.coverage.entropy_after) > 1e-9:
        violations.append(
            f"coverage entropy drifted: recomputed {entropy}, "
            f"recorded {plan.coverage.entropy_after}"
        )
    if gaps != plan.coverage.gaps_after:
        violations.append("coverage gap list drifted from recomputation")
    return violations
