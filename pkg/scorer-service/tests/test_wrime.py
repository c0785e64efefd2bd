import logging

import pytest

from scorer_service import EMOTIONS
from scorer_service.wrime import (
    DatasetError,
    aggregate_intensity,
    load_dataset,
)


def _header(readers=3):
    cols = ["sentence"]
    for e in EMOTIONS:
        cols.append(f"{e}:writer")
        cols.extend(f"{e}:reader{k}" for k in range(1, readers + 1))
    return "\t".join(cols)


def _row(text, target=None, value="3", readers=3):
    cells = [text]
    for e in EMOTIONS:
        v = value if e == target else "0"
        cells.extend([v] * (readers + 1))
    return "\t".join(cells)


def test_aggregate_formula_cases():
    assert aggregate_intensity(3, [2, 2, 2]) == 2.5
    assert aggregate_intensity(0, [0, 0, 0]) == 0.0
    assert aggregate_intensity(1, [1, 1, 3]) == 4 / 3


def test_aggregate_rejects_bad_values():
    with pytest.raises(DatasetError):
        aggregate_intensity(4, [1])
    with pytest.raises(DatasetError):
        aggregate_intensity(1, [])


def test_load_dataset_thresholds_labels(tmp_path):
    path = tmp_path / "data.tsv"
    path.write_text(
        "\n".join([_header(), _row("たのしいいちにち", "happiness"), _row("ふつうのひ")]) + "\n",
        "utf-8",
    )
    data = load_dataset(path)
    by_text = {s.text: s for s in data}
    happy_idx = EMOTIONS.index("happiness")
    assert by_text["たのしいいちにち"].labels[happy_idx] == 1
    assert sum(by_text["たのしいいちにち"].labels) == 1
    assert sum(by_text["ふつうのひ"].labels) == 0


def test_writer3_readers222_is_positive(tmp_path):
    path = tmp_path / "data.tsv"
    cells = ["ゆかいなひ"]
    for e in EMOTIONS:
        if e == "happiness":
            cells.extend(["3", "2", "2", "2"])  # aggregate 2.5 > 1
        else:
            cells.extend(["0", "0", "0", "0"])
    path.write_text(_header() + "\n" + "\t".join(cells) + "\n", "utf-8")
    (sentence,) = load_dataset(path)
    assert sentence.aggregates[EMOTIONS.index("happiness")] == 2.5
    assert sentence.labels[EMOTIONS.index("happiness")] == 1


def test_all_zero_intensities_warn_but_load(tmp_path, caplog):
    path = tmp_path / "data.tsv"
    path.write_text("\n".join([_header(), _row("なにもないひ")]) + "\n", "utf-8")
    with caplog.at_level(logging.WARNING):
        data = load_dataset(path)
    assert all(sum(s.labels) == 0 for s in data)
    assert any("no positive labels" in rec.message for rec in caplog.records)


def test_reannotation_merge_averages_aggregates(tmp_path):
    first = tmp_path / "v1.tsv"
    first.write_text("\n".join([_header(), _row("まざるぶん", "anger", value="3")]) + "\n", "utf-8")
    second = tmp_path / "v2.tsv"
    second.write_text("\n".join([_header(), _row("まざるぶん", "anger", value="1")]) + "\n", "utf-8")
    (merged,) = load_dataset(first, second)
    # round one aggregates to 3.0, round two to 1.0; merged is their mean
    assert merged.aggregates[EMOTIONS.index("anger")] == 2.0


def test_malformed_inputs_rejected(tmp_path):
    empty = tmp_path / "empty.tsv"
    empty.write_text("", "utf-8")
    with pytest.raises(DatasetError):
        load_dataset(empty)

    bad_header = tmp_path / "bad_header.tsv"
    bad_header.write_text("text\tanger:writer\n", "utf-8")
    with pytest.raises(DatasetError, match="sentence"):
        load_dataset(bad_header)

    bad_value = tmp_path / "bad_value.tsv"
    bad_value.write_text(
        "\n".join([_header(), _row("こわれたぎょう", "fear", value="9")]) + "\n", "utf-8"
    )
    with pytest.raises(DatasetError, match=":2:"):
        load_dataset(bad_value)
