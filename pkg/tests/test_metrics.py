import csv
import math

import pytest

from claimpolish.corpus import ContextBundle, MissingContextError
from claimpolish.embedding import HashingEmbedder
from claimpolish.metrics import (
    CSV_COLUMNS,
    EvalInstance,
    bleu,
    context_similarity,
    evaluate_run,
    exact_match_ratio,
    no_edit_ratio,
    rouge_l,
    sari,
    sentence_bleu,
    write_report_csv,
)

EMB = HashingEmbedder(dim=128)


def inst(source, output, references, **ctx):
    return EvalInstance(
        source=source,
        output=output,
        references=tuple(references),
        context=ContextBundle(**ctx),
    )


# ---------------------------------------------------------------------------
# BLEU


def test_bleu_identity_is_exactly_one():
    assert sentence_bleu("the cat sat", ["the cat sat"]) == 1.0
    # short identity: missing orders are skipped, not zero-smoothed
    assert sentence_bleu("so true", ["so true"]) == 1.0
    assert sentence_bleu("yes", ["yes"]) == 1.0


def test_bleu_disjoint_is_small_but_positive():
    value = sentence_bleu("x y z", ["a b c"])
    assert 0.0 < value < 0.05


def test_bleu_partial_overlap_between_extremes():
    partial = sentence_bleu("the cat sat", ["the dog sat"])
    disjoint = sentence_bleu("x y z", ["a b c"])
    assert disjoint < partial < 1.0


def test_bleu_brevity_penalty():
    # perfect precision, half the reference length: BP = exp(1 - r/c)
    assert sentence_bleu("the cat", ["the cat sat on"]) == pytest.approx(
        math.exp(1.0 - 4.0 / 2.0)
    )


def test_bleu_closest_reference_length_ties_to_shorter():
    # lengths 2 and 4 are equally close to 3; the shorter wins, so no penalty
    assert sentence_bleu("a b c", ["a b", "a b c d"]) == pytest.approx(1.0)


def test_bleu_multi_reference_clipping():
    # each token covered by some reference
    value = sentence_bleu("a b", ["a x", "y b"])
    assert value > sentence_bleu("a b", ["a x"])


def test_bleu_empty_output_or_refs():
    assert sentence_bleu("", ["a"]) == 0.0
    assert sentence_bleu("a", []) == 0.0


def test_bleu_corpus_scale():
    instances = [inst("s one", "r one", ["r one"]), inst("s two", "r two", ["r two"])]
    assert bleu(instances) == pytest.approx(100.0, abs=1e-6)
    with pytest.raises(ValueError):
        bleu([])
    with pytest.raises(ValueError):
        bleu(instances, mode="document")


def test_bleu_corpus_mode_pools_counts():
    instances = [
        inst("s", "the cat sat", ["the cat sat"]),
        inst("s", "the dog ran far", ["a dog ran off quickly"]),
    ]
    pooled = bleu(instances, mode="corpus")
    averaged = bleu(instances, mode="sentence")
    assert pooled != averaged
    assert 0.0 < pooled <= 100.0


# ---------------------------------------------------------------------------
# ROUGE-L


def test_rouge_l_fixtures():
    assert rouge_l("the cat sat", "the cat sat") == 1.0
    assert rouge_l("the cat sat", "the cat sat on") == pytest.approx(6 / 7)
    assert rouge_l("x y z", "a b c") == 0.0


def test_rouge_l_is_order_sensitive():
    assert rouge_l("a b c", "c b a") == pytest.approx(1 / 3)


def test_rouge_l_rejects_empty():
    with pytest.raises(ValueError):
        rouge_l("", "a")
    with pytest.raises(ValueError):
        rouge_l("a", "   ")


# ---------------------------------------------------------------------------
# SARI


def test_sari_identity_is_perfect():
    assert sari("a b c", "a b c", ["a b c"]) == pytest.approx(100.0, abs=1e-9)


def test_sari_perfect_deletion():
    assert sari("a b c d", "a b", ["a b"]) == pytest.approx(100.0, abs=1e-9)


def test_sari_perfect_addition():
    assert sari("a b", "a b c", ["a b c"]) == pytest.approx(100.0, abs=1e-9)


def test_sari_spurious_addition_hand_value():
    # keep and delete stay perfect; add earns credit only at order 4,
    # where output and reference both have nothing to add
    assert sari("a b", "a b z", ["a b"]) == pytest.approx(75.0, abs=1e-9)


def test_sari_missed_deletion_hand_value():
    # identity output, but the reference dropped the last token
    keep_total = 0.8 + 2 / 3 + 0.0 + 1.0
    expected = 100.0 * (keep_total / 4 + 1.0 + 1.0) / 3.0
    assert sari("a b c", "a b c", ["a b"]) == pytest.approx(expected, abs=1e-9)


def test_sari_variants_differ_on_partial_deletion():
    # output deletes one of the two tokens the reference deletes:
    # delete precision is 1 but recall is 1/2
    canonical = sari("a b c d", "a b c", ["a b"], variant="canonical")
    all_f1 = sari("a b c d", "a b c", ["a b"], variant="all_f1")
    assert canonical > all_f1
    assert 0.0 < all_f1 < canonical <= 100.0


def test_sari_validation():
    with pytest.raises(ValueError):
        sari("a", "b", [])
    with pytest.raises(ValueError):
        sari("a", "b", ["c"], variant="macro")


def test_sari_multi_reference_replication_changes_score():
    one_ref = sari("a b", "a c", ["a c"])
    two_refs = sari("a b", "a c", ["a c", "a b"])
    assert one_ref == pytest.approx(100.0, abs=1e-9)
    assert two_refs < one_ref


# ---------------------------------------------------------------------------
# ratios and similarity


def test_exact_match_normalizes_whitespace():
    instances = [
        inst("s", "a  b", ["a b"]),
        inst("s", "a c", ["a b"]),
    ]
    assert exact_match_ratio(instances) == 0.5


def test_no_edit_is_byte_exact():
    instances = [
        inst("same text", "same text", ["r"]),
        inst("same text", "same  text", ["r"]),
    ]
    assert no_edit_ratio(instances) == 0.5


def test_context_similarity_bounds_and_identity():
    assert context_similarity("a b c", "a b c", EMB) == pytest.approx(1.0)
    value = context_similarity("unrelated words here", "completely different topic", EMB)
    assert 0.0 <= value <= 1.0


def test_context_similarity_missing_field_raises():
    with pytest.raises(MissingContextError):
        context_similarity("out", None, EMB)
    with pytest.raises(MissingContextError):
        context_similarity("out", "", EMB)


def test_eval_instance_validation():
    with pytest.raises(ValueError):
        EvalInstance(source="s", output="o", references=())
    with pytest.raises(ValueError):
        EvalInstance(source=" ", output="o", references=("r",))
    with pytest.raises(ValueError):
        EvalInstance(source="s", output="o", references=("r", " "))


# ---------------------------------------------------------------------------
# report assembly


def _instances():
    return [
        inst(
            "the tax helps towns",
            "placeholder",
            ["the tax helps towns overall"],
            topic="local taxes",
            previous_claim="taxes were raised",
        ),
        inst(
            "schools need funding",
            "placeholder",
            ["schools need more funding"],
            topic="education",
        ),
    ]


def test_evaluate_run_per_strategy_reports():
    instances = _instances()
    outputs = {
        "unedited": [i.source for i in instances],
        "oracle": [i.references[0] for i in instances],
    }
    reports = evaluate_run(instances, outputs, EMB)
    assert set(reports) == {"unedited", "oracle"}
    assert reports["unedited"].no_edit_ratio == 1.0
    assert reports["oracle"].no_edit_ratio == 0.0
    assert reports["oracle"].exact_match_ratio == 1.0
    assert reports["oracle"].bleu == pytest.approx(100.0, abs=1e-6)
    assert reports["oracle"].rouge_l == pytest.approx(1.0)
    assert reports["oracle"].sari == pytest.approx(100.0, abs=1e-9)
    assert reports["oracle"].n_instances == 2
    # one instance lacks previous_claim: mean is over instances that have it
    assert reports["oracle"].sim_previous is not None
    assert reports["oracle"].sim_topic is not None


def test_evaluate_run_sim_fields_none_without_context():
    instances = [inst("a b", "placeholder", ["a b c"])]
    reports = evaluate_run(instances, {"x": ["a b"]}, EMB)
    assert reports["x"].sim_previous is None
    assert reports["x"].sim_topic is None
    assert reports["x"].sim_original == pytest.approx(1.0)


def test_evaluate_run_rouge_uses_best_reference():
    instances = [inst("s t", "a b c", ["x y z", "a b c"])]
    reports = evaluate_run(instances, {"x": ["a b c"]}, EMB)
    assert reports["x"].rouge_l == pytest.approx(1.0)


def test_evaluate_run_rejects_misaligned_outputs():
    instances = _instances()
    with pytest.raises(ValueError):
        evaluate_run(instances, {"x": ["only one"]}, EMB)
    with pytest.raises(ValueError):
        evaluate_run([], {"x": []}, EMB)


def test_report_csv_layout(tmp_path):
    instances = _instances()
    outputs = {"unedited": [i.source for i in instances]}
    reports = evaluate_run(instances, outputs, EMB)
    path = tmp_path / "report.csv"
    write_report_csv(reports, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(CSV_COLUMNS)
    assert rows[1][0] == "unedited"
    assert rows[1][4] == "1.000000"  # NoEd
    assert len(rows) == 2
