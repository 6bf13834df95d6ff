#!/usr/bin/env python3
"""One-time calibration of the BLEU zero-precision substitute.

Standalone by design: this script shares no code with the package so it can
act as an independent reference when the scorer is implemented.  It computes
per-example BLEU-1 from first principles for the golden caption pairs whose
published scores are dominated by smoothing (the two zero-overlap pairs),
sweeps candidate epsilon values, and reports the value minimising the worst
ratio against the published scores.

The winning epsilon is frozen as the library default.  Run:

    python tools/smoothing_calibration.py
"""

import math

# Golden pairs: (generated caption, reference caption, published BLEU-1).
# Pairs 1 and 2 share no content tokens with their references, so their
# published BLEU-1 is purely the smoothed unigram precision times the
# brevity penalty.  Pair 3 has full unigram precision and pins nothing
# about smoothing; it is listed for the factor-of-two sanity check only.
GOLDEN_PAIRS = [
    ("sailing - ship, sailing - boat.", "sea.", 2.49e-16),
    ("hand.", "arms, fingers.", 3.67e-16),
    ("New Testament.",
     "palace, king, New Testament, adoration of the kings: "
     "the Wise Men present their gifts to the Christ-child.",
     0.00055),
]

PUNCTUATION = set(".,:;!?'\"()-")

CANDIDATE_EPSILONS = [1e-14, 1e-15, 5e-16, 2.5e-16, 1e-16, 1e-17]


def content_tokens(text):
    """Lowercase, isolate punctuation, then drop punctuation-only tokens."""
    tokens, word = [], []
    for ch in text.lower():
        if ch in PUNCTUATION or ch.isspace():
            if word:
                tokens.append("".join(word))
                word = []
        else:
            word.append(ch)
    if word:
        tokens.append("".join(word))
    return tokens


def bleu1(candidate, reference, epsilon):
    cand = content_tokens(candidate)
    ref = content_tokens(reference)
    if not cand:
        return 0.0
    clipped = 0
    pool = list(ref)
    for tok in cand:
        if tok in pool:
            pool.remove(tok)
            clipped += 1
    p1 = clipped / len(cand) if clipped else epsilon
    bp = min(1.0, math.exp(1.0 - len(ref) / len(cand)))
    return bp * p1


def main():
    print("epsilon sweep against golden BLEU-1 scores")
    print("(factor = max(ours/published, published/ours); smaller is better)")
    best = None
    for eps in CANDIDATE_EPSILONS:
        factors = []
        for cand, ref, published in GOLDEN_PAIRS[:2]:
            ours = bleu1(cand, ref, eps)
            factors.append(max(ours / published, published / ours))
        worst = max(factors)
        flags = " ".join(f"x{f:.2f}" for f in factors)
        print(f"  eps={eps:<8g} {flags}  worst x{worst:.3f}")
        if best is None or worst < best[1]:
            best = (eps, worst)

    eps, worst = best
    print(f"chosen epsilon: {eps:g} (worst factor {worst:.3f})")

    # Sanity: the full-precision pair must stay within a factor of two of its
    # published score regardless of epsilon (smoothing never fires there).
    cand, ref, published = GOLDEN_PAIRS[2]
    ours = bleu1(cand, ref, eps)
    factor = max(ours / published, published / ours)
    print(f"full-precision pair: ours={ours:.6e} published={published:g} "
          f"factor x{factor:.3f} ({'OK' if factor < 2.0 else 'FAIL'})")


if __name__ == "__main__":
    main()
