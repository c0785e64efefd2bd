"""Kana-to-phoneme parsing and phoneme coverage statistics.

The parser maps kana text onto a fixed moraic phoneme inventory via a
bundled lookup table (longest match first, so digraphs like きゃ win over
き + ゃ). Coverage math counts n-gram arrangements within each script and
combines their Shannon entropies into a single weighted score.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

VOWELS = ("a", "i", "u", "e", "o")
SPECIALS = ("N", "Q")
ONSETS = (
    "k", "g", "s", "sh", "z", "j", "t", "ch", "ts", "d", "n", "h", "f",
    "b", "p", "m", "y", "r", "w",
    "ky", "gy", "ny", "hy", "by", "py", "my", "ry", "dy", "ty", "fy",
)
INVENTORY = frozenset(VOWELS) | frozenset(SPECIALS) | frozenset(ONSETS)

SOKUON = "っ"
MORAIC_NASAL = "ん"
PROLONGED_MARK = "ー"

# Skipped outright; anything else outside the mora table is an error.
_PUNCTUATION = frozenset(
    "、。！？・「」『』（）〈〉《》【】…‥〜～，．!?.,:;()[]{}\"'“”‘’　 \t\n\r-―"
)


class KanaParseError(ValueError):
    """Unparseable character, with its position in the input text."""

    def __init__(self, text: str, position: int, message: str):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}: {text[position]!r}")


@dataclass(frozen=True)
class PhonemeSequence:
    phones: tuple[str, ...]
    source_script_id: str = ""


def _fold_katakana(text: str) -> str:
    # Katakana block U+30A1..U+30F6 sits 0x60 above its hiragana twin.
    return "".join(
        chr(ord(ch) - 0x60) if "ァ" <= ch <= "ヶ" else ch for ch in text
    )


def load_mora_table(path: str | Path | None = None) -> dict[str, tuple[str, ...]]:
    """Load the kana-to-phonemes table; bundled asset when no path given."""
    if path is None:
        raw = resources.files("nvscript.data").joinpath("mora_table.tsv").read_text("utf-8")
    else:
        raw = Path(path).read_text("utf-8")
    table: dict[str, tuple[str, ...]] = {}
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"mora table line {lineno}: expected kana<TAB>phonemes")
        kana, phones = parts[0], tuple(parts[1].split())
        bad = [p for p in phones if p not in INVENTORY]
        if bad:
            raise ValueError(f"mora table line {lineno}: symbols {bad} not in inventory")
        table[kana] = phones
    return table


_DEFAULT_TABLE: dict[str, tuple[str, ...]] | None = None


def _default_table() -> dict[str, tuple[str, ...]]:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = load_mora_table()
    return _DEFAULT_TABLE


def set_default_table(table: dict[str, tuple[str, ...]]) -> None:
    """Install a custom mora table as the process-wide default.

    Meant for pipeline commands configured with an audited/extended table;
    clears the phone-set cache so earlier parses cannot leak through.
    """
    global _DEFAULT_TABLE
    _DEFAULT_TABLE = dict(table)
    _phone_set_cached.cache_clear()


@lru_cache(maxsize=8192)
def _phone_set_cached(text: str) -> frozenset[str]:
    try:
        return frozenset(kana_to_phonemes(text).phones)
    except KanaParseError:
        return frozenset()


def phone_set(text: str) -> frozenset[str]:
    """Distinct phonemes of a kana text under the default table; empty when
    unparseable. Cached, so repeated coverage checks stay cheap."""
    return _phone_set_cached(text)


def kana_to_phonemes(
    text: str,
    source_script_id: str = "",
    table: dict[str, tuple[str, ...]] | None = None,
) -> PhonemeSequence:
    """Parse kana text into a phoneme sequence.

    Punctuation is skipped. っ maps to Q, ん to N, and ー repeats the most
    recent vowel. Kanji or any other unknown character raises
    KanaParseError with the offending position.
    """
    if table is None:
        table = _default_table()
    folded = _fold_katakana(text)
    phones: list[str] = []
    i = 0
    while i < len(folded):
        ch = folded[i]
        if ch in _PUNCTUATION:
            i += 1
            continue
        if ch == SOKUON:
            phones.append("Q")
            i += 1
            continue
        if ch == MORAIC_NASAL:
            phones.append("N")
            i += 1
            continue
        if ch == PROLONGED_MARK:
            last_vowel = next((p for p in reversed(phones) if p in VOWELS), None)
            if last_vowel is None:
                raise KanaParseError(text, i, "prolonged-sound mark without a vowel")
            phones.append(last_vowel)
            i += 1
            continue
        if folded[i : i + 2] in table:
            phones.extend(table[folded[i : i + 2]])
            i += 2
            continue
        if ch in table:
            phones.extend(table[ch])
            i += 1
            continue
        raise KanaParseError(text, i, "not kana")
    return PhonemeSequence(phones=tuple(phones), source_script_id=source_script_id)


@dataclass
class NGramStats:
    """Counts of m-consecutive-phoneme tuples, m = 1..M, per-script windows."""

    max_order: int
    counts: dict[int, Counter] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for m in range(1, self.max_order + 1):
            self.counts.setdefault(m, Counter())

    def arrangement_count(self, m: int) -> int:
        return len(self.counts[m])

    def total(self, m: int) -> int:
        return sum(self.counts[m].values())

    def merge(self, other: "NGramStats") -> "NGramStats":
        if other.max_order != self.max_order:
            raise ValueError("cannot merge stats with different max orders")
        merged = NGramStats(max_order=self.max_order)
        for m in range(1, self.max_order + 1):
            merged.counts[m] = self.counts[m] + other.counts[m]
        return merged


def count_ngrams(seqs: list[PhonemeSequence], max_order: int) -> NGramStats:
    """Count phoneme m-grams for m = 1..max_order; windows never cross scripts."""
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    stats = NGramStats(max_order=max_order)
    for seq in seqs:
        phones = seq.phones
        for m in range(1, max_order + 1):
            counter = stats.counts[m]
            for start in range(len(phones) - m + 1):
                counter[phones[start : start + m]] += 1
    return stats


@dataclass(frozen=True)
class EntropyConfig:
    max_order: int = 4
    weights: tuple[float, ...] = (0.25, 0.25, 0.25, 0.25)

    def __post_init__(self) -> None:
        if self.max_order < 1:
            raise ValueError("max_order must be positive")
        if len(self.weights) != self.max_order:
            raise ValueError(
                f"need {self.max_order} weights, got {len(self.weights)}"
            )
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {sum(self.weights)}, expected 1")


def order_entropy(stats: NGramStats, m: int) -> float:
    """Shannon entropy (bits) of the order-m arrangement distribution."""
    total = stats.total(m)
    if total == 0:
        return 0.0
    entropy = 0.0
    for count in stats.counts[m].values():
        p = count / total
        entropy -= p * math.log2(p)
    return entropy


def extended_entropy(stats: NGramStats, cfg: EntropyConfig | None = None) -> float:
    """Weighted sum of order-m entropies; empty distributions contribute 0."""
    if cfg is None:
        cfg = EntropyConfig()
    if stats.max_order < cfg.max_order:
        raise ValueError(
            f"stats cover orders up to {stats.max_order}, config needs {cfg.max_order}"
        )
    return sum(
        w * order_entropy(stats, m) for m, w in enumerate(cfg.weights, start=1)
    )


def coverage_gaps(
    stats: NGramStats, inventory: frozenset[str] | set[str] = INVENTORY
) -> tuple[str, ...]:
    """Inventory phonemes absent from the unigram counts, sorted for reports."""
    covered = {phones[0] for phones in stats.counts[1]}
    return tuple(sorted(set(inventory) - covered))
