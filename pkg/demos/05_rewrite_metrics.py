"""What the rewrite metrics reward and punish.

BLEU-4 (smoothed) measures n-gram overlap with the reference, ROUGE-L
longest-common-subsequence overlap, and SARI scores the edit decisions
themselves: keeping what both source and reference keep, deleting what
the reference deletes, adding what the reference adds. Identity outputs
max out BLEU/ROUGE but SARI exposes them the moment edits were wanted.

Run: python3 demos/05_rewrite_metrics.py
"""

from claimpolish.metrics import rouge_l, sari, sentence_bleu


def show(label, source, output, references):
    b = sentence_bleu(output, references) * 100
    r = max(rouge_l(output, ref) for ref in references)
    s = sari(source, output, references)
    print(f"  {label:<22} BLEU {b:6.1f}  RougeL {r:.3f}  SARI {s:6.1f}")
    print(f"    output: {output!r}")


def main():
    source = "the the tax proposal it is good for towns"
    references = ["the tax proposal is good for towns"]
    print(f"source:    {source!r}")
    print(f"reference: {references[0]!r}\n")

    show("reference itself", source, references[0], references)
    show("unedited source", source, source, references)
    show("good rewrite", source, "the tax proposal is good for most towns", references)
    show("over-deletion", source, "the tax proposal", references)
    show("unrelated output", source, "cats are nice", references)

    print("\nmulti-reference: SARI credits an addition any reference wanted")
    source2 = "the plan works"
    refs2 = ["the plan works well", "the plan works today"]
    show("adds 'well'", source2, "the plan works well", refs2)
    show("adds 'today'", source2, "the plan works today", refs2)
    show("adds both", source2, "the plan works well today", refs2)


if __name__ == "__main__":
    main()
