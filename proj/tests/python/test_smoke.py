import math

import pytest

import strux


def make_context():
    return strux.StructuredContext(
        "Harbour town economy",
        [
            strux.Aspect("Fishing era", ["Cod boats left before dawn."]),
            strux.Aspect("Tourism shift", ["Warehouses hold galleries.", "Ferries bring visitors."]),
        ],
    )


def test_validate_and_render():
    ctx = make_context()
    assert strux.validate(ctx) == []
    nested = strux.render(ctx, "nested")
    assert nested.startswith("**Statement's scope: Harbour town economy**")
    assert "**1. Fishing era:**" in nested
    flat = strux.render(ctx, "flattened")
    assert "**" not in flat

    bad = strux.StructuredContext("", [])
    paths = [path for path, _, severity in strux.validate(bad) if severity == "error"]
    assert "scope" in paths and "aspects" in paths


def test_canonical_json_round_trip():
    ctx = make_context()
    outcome = strux.parse_output(strux.canonical_json(ctx))
    assert outcome["status"] == "parsed"
    assert outcome["context"] == ctx


def test_parser_repairs_fenced_alias_output():
    raw = 'noise ```json\n{"Scope":"S","Aspects":[{"AspectName":"A","Descriptions":["d"]}]}\n``` done'
    outcome = strux.parse_output(raw)
    assert outcome["status"] == "repaired"
    assert outcome["context"].scope == "S"

    failed = strux.parse_output("no structure at all")
    assert failed["status"] == "failed"
    assert failed["context"] is None


def test_rouge_worked_example():
    score = strux.rouge_l("They adopt ROUGE", "ROUGE is adopted")
    assert score.f1 == pytest.approx(1 / 3, abs=5e-3)


def test_qa_f1_and_tokens():
    assert strux.qa_f1("Paris", ["Paris"]) == 1.0
    assert strux.normalize_tokens("The cat.", "squad") == ["cat"]


def test_ndcg():
    assert strux.ndcg_at_k([0, 1], 2) == pytest.approx(1 / math.log2(3), abs=1e-9)
    assert strux.ndcg_at_k([1, 0], 2) == 1.0


def test_truncate_middle():
    assert strux.truncate_middle([str(i) for i in range(1, 11)], 6) == ["1", "2", "3", "8", "9", "10"]
    assert strux.truncate_text_middle("one two three four five six", 4) == "one two five six"


def test_prompts():
    zero = strux.build_structurize_prompt("some passage", "zeroshot")
    few = strux.build_structurize_prompt("some passage", "fewshot")
    assert zero.count("### Example") == 0
    assert few.count("### Example") == 2
    assert few.count("some passage") == 1
    abs_prompt = strux.build_baseline_prompt("T", "abs")
    assert abs_prompt == "Summarize the following text with no more than three sentences. Passage: T; Summary: "


def test_semantic_eval_and_embedder():
    ctx = strux.StructuredContext("S", [strux.Aspect("A", ["alpha beta"])])
    embedder = strux.HashEmbedder(16)
    tokens, vectors = embedder.embed("alpha beta")
    assert tokens == ["alpha", "beta"]
    assert len(vectors[0]) == 16
    score = strux.semantic_eval(ctx, "S. A: alpha beta", embedder)
    assert score.f1 == pytest.approx(1.0, abs=1e-9)


def test_per_class_accuracy_and_labels():
    per_label, macro = strux.per_class_accuracy(
        ["Attributable", "Contradictory", "Contradictory"],
        ["Attributable", "Attributable", "Contradictory"],
        strux.attribution_labels,
    )
    assert per_label["Attributable"] == 0.5
    assert per_label["Contradictory"] == 1.0
    assert per_label["Extrapolatory"] is None
    assert macro == pytest.approx(0.75)
    assert strux.extract_attr_label("clearly EXTRAPOLATORY here") == "Extrapolatory"
