"""Deterministic synthetic corpora for pipeline and acceptance tests."""

import json
import random

WORDS = [
    "sea", "ship", "boat", "king", "queen", "palace", "saint", "garden",
    "flowers", "rose", "lion", "deer", "manuscript", "portrait", "woman",
    "man", "child", "angel", "crown", "sword", "book", "candle", "bridge",
    "harbor", "storm", "mountain", "forest", "feast", "banner", "temple",
]

QUALIFIERS = ["ROSE", "LUPINE", "MONTENAY, Georgette de", "1567"]


def make_codes(rng, count=60):
    """Notation pool with correlates that exercise every cleaning rule."""
    codes = {}
    while len(codes) < count:
        base = f"{rng.randint(1, 98)}{rng.choice('ABCDEFG')}{rng.randint(1, 9)}"
        if base in codes:
            continue
        words = rng.sample(WORDS, rng.randint(2, 4))
        text = ", ".join(words)
        roll = rng.random()
        if roll < 0.25:
            text += f" ({rng.choice(QUALIFIERS)})"
        elif roll < 0.35:
            text += " - BB - " + rng.choice(WORDS)
        elif roll < 0.45:
            text += ", etc."
        codes[base] = text
    return codes


def write_corpus(tmp_path, n_images, seed=0):
    """Write annotations JSON and a correlate TSV; returns their paths."""
    rng = random.Random(seed)
    codes = make_codes(rng)
    pool = sorted(codes)
    annotations = {
        f"img{i:05}.jpg": rng.sample(pool, rng.randint(1, 5))
        for i in range(n_images)
    }
    ann_path = tmp_path / "annotations.json"
    ann_path.write_text(json.dumps(annotations), encoding="utf-8")
    tsv_path = tmp_path / "correlates.tsv"
    tsv_path.write_text(
        "\n".join(f"{code}\t{text}" for code, text in sorted(codes.items()))
        + "\n",
        encoding="utf-8",
    )
    return ann_path, tsv_path
