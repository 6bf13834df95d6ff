"""Caption evaluation metrics: BLEU 1-4, ROUGE-L, METEOR, and CIDEr.

All scorers work on token sequences from :func:`tokenize` (lowercased,
punctuation isolated into standalone tokens).  The evaluation pipeline
drops punctuation-only tokens before scoring, so metric values reflect
content-word overlap; turn this off with ``EvalConfig.strip_punctuation``.

Parameter defaults were calibrated once against the golden per-example
scores and are frozen here: BLEU's zero-precision substitute comes from
``tools/smoothing_calibration.py``, and the METEOR fragmentation penalty
(gamma, theta) is the pair that reproduces the golden fourth pair within
its tolerance.

Scores are kept in natural scale: BLEU, METEOR and ROUGE-L in [0, 1],
CIDEr in [0, 10].  Reports offer a x100 presentation mode.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateId, EmptyCorpus, IoFailure, MissingReference

PUNCTUATION = set(".,:;!?'\"()-")

DEFAULT_SMOOTHING_EPSILON = 5e-16  # frozen by tools/smoothing_calibration.py
DEFAULT_ROUGE_BETA = 1.2
DEFAULT_METEOR_ALPHA = 0.9
DEFAULT_METEOR_GAMMA = 0.6
DEFAULT_METEOR_THETA = 0.2

METRIC_NAMES = ("bleu1", "bleu2", "bleu3", "bleu4", "meteor", "rouge_l", "cider")


def tokenize(text: str) -> list[str]:
    """Lowercase and split; punctuation characters become standalone tokens."""
    tokens: list[str] = []
    word: list[str] = []
    for ch in text.lower():
        if ch in PUNCTUATION:
            if word:
                tokens.append("".join(word))
                word = []
            tokens.append(ch)
        elif ch.isspace():
            if word:
                tokens.append("".join(word))
                word = []
        else:
            word.append(ch)
    if word:
        tokens.append("".join(word))
    return tokens


def strip_punctuation_tokens(tokens: list[str]) -> list[str]:
    return [t for t in tokens if t not in PUNCTUATION]


@dataclass(frozen=True)
class EvalPair:
    """A candidate token sequence and its (non-empty) reference list."""

    image_id: str
    candidate: tuple[str, ...]
    references: tuple[tuple[str, ...], ...]

    @classmethod
    def from_text(
        cls, image_id: str, candidate: str, references: list[str],
        strip_punctuation: bool = True,
    ) -> EvalPair:
        def prep(text: str) -> tuple[str, ...]:
            toks = tokenize(text)
            if strip_punctuation:
                toks = strip_punctuation_tokens(toks)
            return tuple(toks)

        return cls(image_id, prep(candidate), tuple(prep(r) for r in references))


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

def _ngram_counts(tokens: tuple[str, ...], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _closest_ref_len(cand_len: int, refs: tuple[tuple[str, ...], ...]) -> int:
    # ties go to the shorter reference
    return min((abs(len(r) - cand_len), len(r)) for r in refs)[1]


def _bleu_stats(
    candidate: tuple[str, ...],
    references: tuple[tuple[str, ...], ...],
    max_n: int,
) -> tuple[list[int], list[int], int, int]:
    """Clipped and total n-gram counts plus candidate/closest-ref lengths."""
    clipped = [0] * max_n
    totals = [0] * max_n
    for n in range(1, max_n + 1):
        cand_counts = _ngram_counts(candidate, n)
        if not cand_counts:
            continue
        max_ref: Counter = Counter()
        for ref in references:
            for gram, count in _ngram_counts(ref, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        totals[n - 1] = sum(cand_counts.values())
        clipped[n - 1] = sum(
            min(count, max_ref.get(gram, 0))
            for gram, count in cand_counts.items()
        )
    return clipped, totals, len(candidate), _closest_ref_len(len(candidate), references)


def _bleu_from_stats(
    clipped: list[int], totals: list[int], cand_len: int, ref_len: int,
    max_n: int, smoothing_epsilon: float,
) -> float:
    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(max_n):
        if clipped[n] > 0 and totals[n] > 0:
            p = clipped[n] / totals[n]
        else:
            p = smoothing_epsilon
        log_sum += math.log(p)
    bp = min(1.0, math.exp(1.0 - ref_len / cand_len))
    return bp * math.exp(log_sum / max_n)


def bleu(
    pair: EvalPair,
    max_n: int = 4,
    smoothing_epsilon: float = DEFAULT_SMOOTHING_EPSILON,
) -> float:
    """Geometric mean of clipped n-gram precisions times the brevity penalty.

    Zero precisions (including orders longer than the candidate) are
    replaced by ``smoothing_epsilon``.  An empty candidate scores 0.
    """
    clipped, totals, cand_len, ref_len = _bleu_stats(
        pair.candidate, pair.references, max_n
    )
    return _bleu_from_stats(
        clipped, totals, cand_len, ref_len, max_n, smoothing_epsilon
    )


def corpus_bleu(
    pairs: list[EvalPair],
    max_n: int = 4,
    smoothing_epsilon: float = DEFAULT_SMOOTHING_EPSILON,
) -> float:
    """BLEU over summed clipped counts and lengths (corpus aggregation)."""
    if not pairs:
        raise EmptyCorpus("corpus BLEU over zero pairs")
    clipped_sum = [0] * max_n
    totals_sum = [0] * max_n
    cand_len_sum = 0
    ref_len_sum = 0
    for pair in pairs:
        clipped, totals, cand_len, ref_len = _bleu_stats(
            pair.candidate, pair.references, max_n
        )
        for n in range(max_n):
            clipped_sum[n] += clipped[n]
            totals_sum[n] += totals[n]
        cand_len_sum += cand_len
        ref_len_sum += ref_len
    return _bleu_from_stats(
        clipped_sum, totals_sum, cand_len_sum, ref_len_sum, max_n,
        smoothing_epsilon,
    )


# ---------------------------------------------------------------------------
# ROUGE-L
# ---------------------------------------------------------------------------

def lcs_length(a: tuple[str, ...], b: tuple[str, ...]) -> int:
    """Longest common subsequence length, O(len(a) * len(b))."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        append = cur.append
        for j, y in enumerate(b, 1):
            if x == y:
                append(prev[j - 1] + 1)
            else:
                left = cur[j - 1]
                up = prev[j]
                append(left if left >= up else up)
        prev = cur
    return prev[-1]


def rouge_l(pair: EvalPair, beta: float = DEFAULT_ROUGE_BETA) -> float:
    """LCS-based F-measure; the maximum over references."""
    best = 0.0
    for ref in pair.references:
        length = lcs_length(pair.candidate, ref)
        if length == 0:
            continue
        recall = length / len(ref)
        precision = length / len(pair.candidate)
        score = ((1 + beta**2) * recall * precision) / (
            recall + beta**2 * precision
        )
        if score > best:
            best = score
    return best


# ---------------------------------------------------------------------------
# METEOR
# ---------------------------------------------------------------------------

_STEM_SUFFIXES = (("sses", "ss"), ("ies", "y"), ("ing", ""), ("ed", ""), ("s", ""))


def light_stem(word: str) -> str:
    """Fixed suffix-stripping stemmer used by the METEOR stem stage."""
    if len(word) <= 3:
        return word
    for suffix, replacement in _STEM_SUFFIXES:
        if word.endswith(suffix):
            if suffix == "s" and word.endswith(("ss", "us", "is")):
                continue
            stem = word[: -len(suffix)] + replacement
            if len(stem) >= 2:
                return stem
    return word


def _align(
    candidate: tuple[str, ...],
    reference: tuple[str, ...],
    synonyms: dict[str, set[str]] | None,
) -> list[tuple[int, int]]:
    """Greedy unigram alignment: exact, then stem, then synonym-table stage."""
    cand_free = [True] * len(candidate)
    ref_free = [True] * len(reference)
    matches: list[tuple[int, int]] = []

    def run_stage(equal) -> None:
        for i, c_tok in enumerate(candidate):
            if not cand_free[i]:
                continue
            for j, r_tok in enumerate(reference):
                if ref_free[j] and equal(c_tok, r_tok):
                    cand_free[i] = False
                    ref_free[j] = False
                    matches.append((i, j))
                    break

    run_stage(lambda c, r: c == r)
    run_stage(lambda c, r: light_stem(c) == light_stem(r))
    if synonyms:
        run_stage(
            lambda c, r: r in synonyms.get(c, ()) or c in synonyms.get(r, ())
        )
    matches.sort()
    return matches


def _count_chunks(matches: list[tuple[int, int]]) -> int:
    chunks = 1
    for (i0, j0), (i1, j1) in zip(matches, matches[1:]):
        if i1 != i0 + 1 or j1 != j0 + 1:
            chunks += 1
    return chunks


def meteor(
    pair: EvalPair,
    alpha: float = DEFAULT_METEOR_ALPHA,
    gamma: float = DEFAULT_METEOR_GAMMA,
    theta: float = DEFAULT_METEOR_THETA,
    synonyms: dict[str, set[str]] | None = None,
) -> float:
    """Unigram-alignment F-mean with a fragmentation penalty; max over refs.

    With m aligned unigrams, P = m/|cand|, R = m/|ref|,
    F = P*R / (alpha*P + (1-alpha)*R), penalty = gamma*(chunks/m)**theta,
    score = F*(1-penalty).  Zero when nothing aligns.  ``synonyms`` is an
    optional match table for a third alignment stage; none ships.
    """
    if not pair.candidate:
        return 0.0
    best = 0.0
    for ref in pair.references:
        if not ref:
            continue
        matches = _align(pair.candidate, ref, synonyms)
        m = len(matches)
        if m == 0:
            continue
        precision = m / len(pair.candidate)
        recall = m / len(ref)
        f_mean = (precision * recall) / (
            alpha * precision + (1 - alpha) * recall
        )
        penalty = gamma * (_count_chunks(matches) / m) ** theta
        score = f_mean * (1 - penalty)
        if score > best:
            best = score
    return best


# ---------------------------------------------------------------------------
# CIDEr
# ---------------------------------------------------------------------------

def _tfidf_vector(
    tokens: tuple[str, ...], n: int, idf: dict[tuple[str, ...], float]
) -> dict[tuple[str, ...], float]:
    # raw counts as TF, weighted by corpus IDF
    return {
        gram: count * idf.get(gram, 0.0)
        for gram, count in _ngram_counts(tokens, n).items()
    }


def _cosine(
    a: dict[tuple[str, ...], float], b: dict[tuple[str, ...], float]
) -> float:
    norm_a = math.sqrt(sum(v * v for v in a.values()))
    norm_b = math.sqrt(sum(v * v for v in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    dot = sum(v * b[g] for g, v in a.items() if g in b)
    return dot / (norm_a * norm_b)


def cider(pairs: list[EvalPair], max_n: int = 4) -> tuple[list[float], float]:
    """Per-example scores in [0, 10] plus the corpus mean.

    IDF(g) = log(|corpus| / max(1, images whose references contain g)) is a
    corpus-level reduction, so an n-gram present in every image's reference
    set weighs exactly zero.  Per example the score is 10 times the mean
    over orders 1..max_n of the cosine between candidate and reference
    TF-IDF vectors (TF = raw counts; mean over references when several).
    """
    if not pairs:
        raise EmptyCorpus("CIDEr over zero pairs")
    n_images = len(pairs)
    doc_freq: Counter = Counter()
    for pair in pairs:
        grams: set[tuple[str, ...]] = set()
        for ref in pair.references:
            for n in range(1, max_n + 1):
                grams.update(_ngram_counts(ref, n))
        doc_freq.update(grams)
    idf = {
        gram: math.log(n_images / max(1, df)) for gram, df in doc_freq.items()
    }
    # candidate-only n-grams never appear in any reference: df floor of 1
    idf_default = math.log(n_images)

    scores = []
    for pair in pairs:
        total = 0.0
        for n in range(1, max_n + 1):
            cand_vec = {
                gram: count * idf.get(gram, idf_default)
                for gram, count in _ngram_counts(pair.candidate, n).items()
            }
            sim = 0.0
            for ref in pair.references:
                sim += _cosine(cand_vec, _tfidf_vector(ref, n, idf))
            total += sim / len(pair.references)
        scores.append(10.0 * total / max_n)
    return scores, sum(scores) / len(scores)


# ---------------------------------------------------------------------------
# Evaluation pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalConfig:
    max_n: int = 4
    smoothing_epsilon: float = DEFAULT_SMOOTHING_EPSILON
    rouge_beta: float = DEFAULT_ROUGE_BETA
    meteor_alpha: float = DEFAULT_METEOR_ALPHA
    meteor_gamma: float = DEFAULT_METEOR_GAMMA
    meteor_theta: float = DEFAULT_METEOR_THETA
    strip_punctuation: bool = True
    jobs: int = 1


@dataclass
class MetricReport:
    """Per-example rows plus the corpus row, in natural scale."""

    corpus: dict[str, float]
    examples: list[dict[str, object]]
    meta: dict[str, object] = field(default_factory=dict)

    def _scaled(self, x100: bool) -> tuple[dict, list[dict]]:
        if not x100:
            return self.corpus, self.examples
        corpus = {k: v * 100 for k, v in self.corpus.items()}
        examples = [
            {
                k: (v * 100 if k in METRIC_NAMES else v)
                for k, v in row.items()
            }
            for row in self.examples
        ]
        return corpus, examples

    def to_json(self, x100: bool = False) -> str:
        corpus, examples = self._scaled(x100)
        payload: dict[str, object] = dict(self.meta)
        payload["corpus"] = corpus
        payload["examples"] = examples
        return json.dumps(payload, ensure_ascii=False, indent=2)

    def to_csv(self, x100: bool = False) -> str:
        _, examples = self._scaled(x100)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["image_id", *METRIC_NAMES])
        for row in examples:
            writer.writerow([row["image_id"], *(row[name] for name in METRIC_NAMES)])
        return buf.getvalue()


def load_caption_map(path: str | Path) -> dict[str, str]:
    """Read a ``{"image_id", "caption"}`` JSONL file into an id-keyed map."""
    captions: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise IoFailure(
                        f"{path}: line {lineno} is not valid JSON: {exc}"
                    ) from exc
                image_id = str(row["image_id"])
                if image_id in captions:
                    raise DuplicateId(image_id)
                captions[image_id] = str(row.get("caption", ""))
    except OSError as exc:
        raise IoFailure(f"cannot read captions {path}: {exc}") from exc
    return captions


def _score_pair(
    args: tuple[EvalPair, EvalConfig],
) -> dict[str, object]:
    pair, config = args
    row: dict[str, object] = {"image_id": pair.image_id}
    clipped, totals, cand_len, ref_len = _bleu_stats(
        pair.candidate, pair.references, config.max_n
    )
    for n in range(1, config.max_n + 1):
        row[f"bleu{n}"] = _bleu_from_stats(
            clipped, totals, cand_len, ref_len, n, config.smoothing_epsilon
        )
    row["meteor"] = meteor(
        pair, config.meteor_alpha, config.meteor_gamma, config.meteor_theta
    )
    row["rouge_l"] = rouge_l(pair, config.rouge_beta)
    return row


def evaluate_pairs(
    pairs: list[EvalPair], config: EvalConfig | None = None
) -> MetricReport:
    """Score already-tokenized pairs; :func:`evaluate` is the file front end."""
    config = config or EvalConfig()
    if not pairs:
        raise EmptyCorpus("evaluation over zero pairs")
    pairs = sorted(pairs, key=lambda p: p.image_id)

    work = [(pair, config) for pair in pairs]
    if config.jobs > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(_score_pair, work, chunksize=64))
    else:
        rows = [_score_pair(item) for item in work]

    cider_scores, cider_corpus = cider(pairs, config.max_n)
    for row, score in zip(rows, cider_scores):
        row["cider"] = score

    corpus: dict[str, float] = {}
    for n in range(1, config.max_n + 1):
        corpus[f"bleu{n}"] = corpus_bleu(pairs, n, config.smoothing_epsilon)
    corpus["meteor"] = sum(r["meteor"] for r in rows) / len(rows)
    corpus["rouge_l"] = sum(r["rouge_l"] for r in rows) / len(rows)
    corpus["cider"] = cider_corpus
    return MetricReport(corpus=corpus, examples=rows)


def evaluate(
    candidates_path: str | Path,
    references_path: str | Path,
    config: EvalConfig | None = None,
) -> MetricReport:
    """Score a candidate JSONL file against a reference JSONL file.

    Every candidate id must have a reference; reference ids without a
    candidate are ignored.  Raises MissingReference / DuplicateId.
    """
    config = config or EvalConfig()
    candidates = load_caption_map(candidates_path)
    references = load_caption_map(references_path)
    pairs = []
    for image_id in sorted(candidates):
        if image_id not in references:
            raise MissingReference(image_id)
        pairs.append(
            EvalPair.from_text(
                image_id,
                candidates[image_id],
                [references[image_id]],
                strip_punctuation=config.strip_punctuation,
            )
        )
    return evaluate_pairs(pairs, config)
