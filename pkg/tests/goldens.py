"""Golden fixtures: cleaning before/after pairs and per-example metric targets.

The cleaning pairs are upstream description texts with their expected
cleaned form; comparisons normalize whitespace before the terminal period
because the expected texts are typographically inconsistent there.

The metric pairs carry published per-example scores for one generated
caption against its reference.  Pairs 2 and 3 share no content tokens with
their references; pair 1's nonzero METEOR needs a synonym resource that
does not ship, so only its zero-valued scores are asserted.
"""

import re

CLEANING_PAIRS = [
    (
        "Madonna: i.e. Mary with the Christ-child, flowers: rose, "
        "historical persons (portraits and scenes from the life) "
        "(+ half-length portrait)",
        "Madonna: i.e. Mary with the Christ-child, flowers: rose, "
        "historical persons .",
    ),
    (
        "adult woman, manuscript of musical score, writer, poet, author "
        "(+ portrait, self-portrait of artist), pen, ink-well, paper "
        "(writing material), codex, inscription, historical events and "
        "situations (1567), historical person (MONTENAY, Georgette de) "
        "- BB - woman - historical person (MONTENAY, Georgette de) "
        "portrayed alone, proverbs, sayings, etc. "
        "(O PLUME EN LA MAIN NON VAINE)",
        "adult woman, manuscript of musical score, writer, poet, author , "
        "pen, ink-well, paper , codex, inscription, historical events and "
        "situations , historical person, woman - historical person "
        "portrayed alone, proverbs, sayings.",
    ),
    (
        "plants and herbs (HELLEBORINE), plants and herbs (LUPINE),",
        "plants and herbs .",
    ),
]

# (candidate, reference, published per-example scores)
METRIC_PAIRS = [
    {
        "candidate": "sailing - ship, sailing - boat.",
        "reference": "sea.",
        "scores": {"bleu1": 2.49e-16, "meteor": 0.16, "rouge_l": 0.0,
                   "cider": 0.0},
    },
    {
        "candidate": "head turned to the right, historical persons.",
        "reference": "apostle, unspecified, key.",
        "scores": {"bleu1": 1.43e-16, "meteor": 0.0, "rouge_l": 0.0,
                   "cider": 0.0},
    },
    {
        "candidate": "hand.",
        "reference": "arms, fingers.",
        "scores": {"bleu1": 3.67e-16, "meteor": 0.0, "rouge_l": 0.0,
                   "cider": 0.0},
    },
    {
        "candidate": "New Testament.",
        "reference": "palace, king, New Testament, adoration of the kings: "
                     "the Wise Men present their gifts to the Christ-child.",
        "scores": {"bleu1": 0.00055, "meteor": 0.0552, "rouge_l": 0.184,
                   "cider": 0.051},
    },
]


def normalize_terminal(text: str) -> str:
    """Collapse whitespace before the terminal period and trailing space."""
    return re.sub(r"\s+\.$", ".", text.rstrip())
