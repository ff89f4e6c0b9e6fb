"""Score a candidate pool and compare selection strategies.

Every candidate gets a three-axis quality vector (fluency, meaning
preservation, argument quality), each in [0, 1]. The combined score is
a weighted sum; selection strategies range from "never edit" baselines
to the combined-score argmax and a learned pairwise ranker.

Run: python3 demos/03_scoring_and_selection.py
"""

from claimpolish.embedding import HashingEmbedder
from claimpolish.genkit import GenerationConfig, MockGenerator, dedup, generate_candidates, make_schedule
from claimpolish.scoring import DEFAULT_WEIGHTS, autoscore, default_registry, score_candidate
from claimpolish.selection import (
    RankerHyperparams,
    Strategy,
    select,
    train_pairwise_ranker,
)


def main():
    source = "its good that the tax passed, we think"
    config = GenerationConfig(n_candidates=10)
    cset = dedup(
        generate_candidates(
            MockGenerator(), source, config, make_schedule(config.n_candidates), seed=3
        )
    )

    registry = default_registry()
    scores = [score_candidate(registry, source, c.text, None) for c in cset.candidates]

    print(f"weights: alpha={DEFAULT_WEIGHTS.alpha} beta={DEFAULT_WEIGHTS.beta} "
          f"gamma={DEFAULT_WEIGHTS.gamma}")
    print(f"{'combined':>8}  {'flu':>5} {'mean':>5} {'arg':>5}  text")
    for cand, vec in zip(cset.candidates, scores):
        print(f"{autoscore(vec, DEFAULT_WEIGHTS):8.3f}  "
              f"{vec.fluency:5.2f} {vec.meaning:5.2f} {vec.argument:5.2f}  "
              f"{cand.text[:60]!r}")

    # a tiny ranker trained on (worse, better) rewrite pairs
    training = [
        ("the plan is bad", "The plan is bad. It ignores the budget entirely."),
        ("taxes help", "Taxes help. They fund the services people rely on."),
        ("we should act", "We should act. Waiting only raises the eventual cost."),
    ]
    embedder = HashingEmbedder(dim=256, seed=0)
    ranker = train_pairwise_ranker(training, embedder, RankerHyperparams(seed=0))

    print("\nstrategy choices:")
    for strategy in Strategy:
        result = select(
            strategy, source, cset, scores,
            weights=DEFAULT_WEIGHTS, ranker=ranker, seed=11,
        )
        flag = "edited" if result.edited else "kept  "
        print(f"  {strategy.value:<14} {flag} {result.chosen.text[:58]!r}")


if __name__ == "__main__":
    main()
