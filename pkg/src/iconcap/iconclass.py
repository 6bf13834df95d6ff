"""Iconclass notation parsing, hierarchy navigation, and correlate lookup.

An Iconclass notation is a digit-led alphanumeric path such as ``25G4``,
optionally followed by parenthesized groups: free-text qualifiers like
``(ROSE)`` and ``(+...)`` keys like ``(+1)``.  The grammar accepted here is

    notation := digits (letters | digits)* group*
    group    := "(" [^()]* ")"

with uppercase letters only, nested parentheses rejected, and whitespace
outside groups ignored.  A group whose content starts with ``+`` is a key
(the ``+`` is stripped); any other group is a qualifier.
"""

from __future__ import annotations

import json
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IoFailure, MalformedNotation, SchemaViolation


@dataclass(frozen=True)
class IconclassNotation:
    """A parsed notation.

    ``raw`` is the input exactly as ingested and is excluded from equality:
    two notations are equal when their structure (base segments, qualifiers,
    keys) is equal.
    """

    raw: str = field(compare=False)
    base: tuple[str, ...]
    qualifiers: tuple[str, ...]
    keys: tuple[str, ...]

    def serialize(self) -> str:
        """Canonical text form: base, then qualifiers, then keys."""
        parts = ["".join(self.base)]
        parts += [f"({q})" for q in self.qualifiers]
        parts += [f"(+{k})" for k in self.keys]
        return "".join(parts)


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def parse_notation(raw: str) -> IconclassNotation:
    """Parse ``raw`` into a structured notation.

    Raises MalformedNotation for empty input, a leading non-digit,
    unbalanced or nested parentheses, or any character outside the grammar.
    The error carries the byte offset of the first offending character in
    the original string.
    """
    text = raw
    n = len(text)
    i = 0
    # leading whitespace
    while i < n and text[i].isspace():
        i += 1
    if i == n:
        raise MalformedNotation("empty notation", _byte_offset(text, 0))
    if not text[i].isdigit():
        raise MalformedNotation(
            f"notation must start with a digit, got {text[i]!r}",
            _byte_offset(text, i),
        )

    segments: list[str] = []
    segment_is_digit: list[bool] = []
    qualifiers: list[str] = []
    keys: list[str] = []
    seen_group = False

    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "(":
            open_at = i
            i += 1
            start = i
            while i < n and text[i] not in "()":
                i += 1
            if i == n:
                raise MalformedNotation(
                    "unterminated group", _byte_offset(text, open_at)
                )
            if text[i] == "(":
                raise MalformedNotation(
                    "nested parenthesis", _byte_offset(text, i)
                )
            content = text[start:i]
            i += 1  # consume ")"
            if content.startswith("+"):
                if content.startswith("++"):
                    raise MalformedNotation(
                        "key content begins with '+'",
                        _byte_offset(text, start + 1),
                    )
                keys.append(content[1:])
            else:
                qualifiers.append(content)
            seen_group = True
        elif ch.isdigit() or "A" <= ch <= "Z":
            if seen_group:
                raise MalformedNotation(
                    "base character after a group", _byte_offset(text, i)
                )
            kind = ch.isdigit()
            start = i
            while i < n and (
                text[i].isdigit() if kind else "A" <= text[i] <= "Z"
            ):
                i += 1
            run = text[start:i]
            # whitespace outside groups is stripped, so a run separated
            # from its predecessor only by spaces continues that segment
            if segment_is_digit and segment_is_digit[-1] == kind:
                segments[-1] += run
            else:
                segments.append(run)
                segment_is_digit.append(kind)
        else:
            raise MalformedNotation(
                f"unexpected character {ch!r}", _byte_offset(text, i)
            )

    return IconclassNotation(
        raw=raw,
        base=tuple(segments),
        qualifiers=tuple(qualifiers),
        keys=tuple(keys),
    )


def parent(n: IconclassNotation) -> IconclassNotation | None:
    """One step up the hierarchy; None at the root.

    Keys are stripped first, then qualifiers, then the base is shortened one
    character at a time (dropping a segment when it empties).
    """
    if n.keys:
        trimmed = IconclassNotation("", n.base, n.qualifiers, n.keys[:-1])
    elif n.qualifiers:
        trimmed = IconclassNotation("", n.base, n.qualifiers[:-1], n.keys)
    else:
        last = n.base[-1]
        if len(n.base) == 1 and len(last) == 1:
            return None
        base = n.base[:-1] if len(last) == 1 else n.base[:-1] + (last[:-1],)
        trimmed = IconclassNotation("", base, (), ())
    return IconclassNotation(
        trimmed.serialize(), trimmed.base, trimmed.qualifiers, trimmed.keys
    )


def ancestors(n: IconclassNotation) -> Iterator[IconclassNotation]:
    """Yield successive parents up to (and including) the root."""
    node = parent(n)
    while node is not None:
        yield node
        node = parent(node)


@dataclass(frozen=True)
class CorrelateStore:
    """Immutable map from canonical notation text to its English correlate."""

    entries: dict[str, str]

    def lookup(self, notation: str) -> str | None:
        return self.entries.get(notation)

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_pairs(cls, pairs: dict[str, str]) -> CorrelateStore:
        entries: dict[str, str] = {}
        for key, text in pairs.items():
            if not text:
                continue
            entries[_canonical(key)] = text
        return cls(entries)

    @classmethod
    def from_tsv(cls, path: str | Path) -> CorrelateStore:
        """Load ``notation<TAB>text`` lines; ``#`` lines and blanks skipped."""
        entries: dict[str, str] = {}
        try:
            with open(path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    line = line.rstrip("\n")
                    if not line.strip() or line.startswith("#"):
                        continue
                    if "\t" not in line:
                        raise SchemaViolation(
                            f"{path}: line {lineno} has no tab separator"
                        )
                    key, text = line.split("\t", 1)
                    if not text:
                        continue
                    entries[_canonical(key)] = text
        except OSError as exc:
            raise IoFailure(f"cannot read correlate table {path}: {exc}") from exc
        return cls(entries)

    @classmethod
    def from_json(cls, path: str | Path) -> CorrelateStore:
        """Load a JSON object mapping notation to correlate text."""
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise IoFailure(f"cannot read correlate table {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise SchemaViolation(f"{path}: top level must be an object")
        for key, text in data.items():
            if not isinstance(text, str):
                raise SchemaViolation(
                    f"{path}: correlate for {key!r} is not a string"
                )
        return cls.from_pairs(data)


def _canonical(key: str) -> str:
    """Canonical form of a store key; unparseable keys kept verbatim."""
    try:
        return parse_notation(key).serialize()
    except MalformedNotation:
        return key.strip()


def correlate(
    n: IconclassNotation,
    store: CorrelateStore,
    parent_fallback: bool = False,
) -> str | None:
    """Exact-match lookup of ``n``'s correlate; absence is a value.

    With ``parent_fallback`` the parent chain is walked until a correlate is
    found or the root is exhausted.
    """
    text = store.lookup(n.serialize())
    if text is not None or not parent_fallback:
        return text
    for node in ancestors(n):
        text = store.lookup(node.serialize())
        if text is not None:
            return text
    return None


@dataclass(frozen=True)
class AnnotationRecord:
    """One image and its notation codes, in source order."""

    image_id: str
    codes: tuple[str, ...]


def load_annotations(path: str | Path) -> list[AnnotationRecord]:
    """Read the annotation JSON: an object of image filename -> code array.

    Records with empty code arrays are retained (the caption builder drops
    them later).  Raises SchemaViolation naming the offending key when a
    value is not an array of strings.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read annotations {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaViolation(f"{path}: top level must be an object")

    records = []
    for image_id, codes in data.items():
        if not isinstance(codes, list):
            raise SchemaViolation(
                f"{path}: value for {image_id!r} is not an array"
            )
        for code in codes:
            if not isinstance(code, str):
                raise SchemaViolation(
                    f"{path}: non-string code under {image_id!r}"
                )
        records.append(AnnotationRecord(image_id, tuple(codes)))
    return records
