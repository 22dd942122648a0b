"""Natural-language understanding for control-room commands.

A small trainable classifier plus lexicon-driven entity extraction.
Intent scoring is a weighted token-overlap model learned from a labeled
utterance corpus; entities (monitor references, audio devices, deictic
words, time offsets) come from hand-built patterns so extraction stays
deterministic and inspectable.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

INTENTS = (
    "audio_off",
    "audio_to_device",
    "forward",
    "rewind",
    "split_screen",
    "swap",
    "zoom_in",
    "zoom_out",
)

MODEL_FORMAT_VERSION = 1

GRID_ROWS = 3
GRID_COLS = 3


class NluError(ValueError):
    pass


class IncompleteCorpusError(NluError):
    """The training corpus does not cover every intent."""


class TrainingError(NluError):
    """Contradictory labels for the same utterance text."""


class InvalidUtteranceError(NluError):
    """Empty or non-text input to classification."""


class OutOfGridError(NluError):
    """A monitor reference falls outside the 3x3 grid."""


@dataclass(frozen=True)
class EntitySpan:
    """A tagged character span with its normalized payload.

    label: monitor | ref | ref_x | ref_y | device | deictic_singular |
           deictic_plural | time_offset
    value: monitor id, device name, seconds, plurality marker, or None
           when the mention could not be resolved.
    """

    label: str
    start: int
    end: int
    value: Union[int, float, str, None]
    confidence: float = 1.0
    children: tuple["EntitySpan", ...] = ()

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class NluResult:
    text: str
    speech_start: int
    speech_end: int
    intents: tuple[tuple[str, float], ...]
    entities: tuple[EntitySpan, ...]

    @property
    def top_intent(self) -> str:
        return self.intents[0][0]


@dataclass(frozen=True)
class LabeledUtterance:
    text: str
    intent: str
    entities: tuple[EntitySpan, ...] = ()


@dataclass(frozen=True)
class NluModel:
    """Immutable trained scorer: token weight table plus exact-text memory."""

    token_weights: Mapping[str, Mapping[str, float]]
    token_idf: Mapping[str, float]
    exact: Mapping[str, str]
    default_idf: float


_WORD_RE = re.compile(r"[a-z0-9]+")
_SUFFIXES = ("ing", "ed", "es", "s")
_STEM_KEEP = {"this", "these", "those"}  # deictics must not collapse together


def _stem(token: str) -> str:
    if token in _STEM_KEEP or len(token) <= 3:
        return token
    for suf in _SUFFIXES:
        if token.endswith(suf) and len(token) - len(suf) >= 3:
            return token[: -len(suf)]
    return token


def tokenize(text: str) -> list[str]:
    """Lowercased stems with digit runs abstracted to a number marker."""
    out = []
    for tok in _WORD_RE.findall(text.lower()):
        out.append("<num>" if tok.isdigit() else _stem(tok))
    return out


def _normal_form(text: str) -> str:
    return " ".join(tokenize(text))


# ---------------------------------------------------------------------------
# training and classification


def train(corpus: Sequence[LabeledUtterance]) -> NluModel:
    """Fit the token weight table from labeled utterances.

    Each intent needs at least one example; identical texts with
    different labels are a contradiction and abort training.
    """
    seen = {u.intent for u in corpus}
    unknown = seen - set(INTENTS)
    if unknown:
        raise IncompleteCorpusError(f"corpus contains unknown intent labels: {sorted(unknown)}")
    missing = [i for i in INTENTS if i not in seen]
    if missing:
        raise IncompleteCorpusError(f"corpus has no examples for intents: {missing}")

    exact: dict[str, str] = {}
    for utt in corpus:
        key = _normal_form(utt.text)
        if not key:
            raise TrainingError(f"utterance {utt.text!r} has no usable tokens")
        if exact.get(key, utt.intent) != utt.intent:
            raise TrainingError(
                f"conflicting labels for {utt.text!r}: {exact[key]} vs {utt.intent}"
            )
        exact[key] = utt.intent

    token_intent: dict[str, dict[str, int]] = {}
    for utt in corpus:
        for tok in set(tokenize(utt.text)):
            token_intent.setdefault(tok, {}).setdefault(utt.intent, 0)
            token_intent[tok][utt.intent] += 1

    n = len(corpus)
    weights: dict[str, dict[str, float]] = {}
    idf: dict[str, float] = {}
    for tok, per_intent in token_intent.items():
        df = sum(per_intent.values())
        idf[tok] = math.log(1.0 + n / df)
        weights[tok] = {i: c / df for i, c in per_intent.items()}
    default_idf = math.log(1.0 + n)  # unseen tokens count as maximally rare
    return NluModel(weights, idf, exact, default_idf)


def _scores(model: NluModel, tokens: Sequence[str]) -> dict[str, float]:
    totals = {i: 0.0 for i in INTENTS}
    denom = 0.0
    for tok in tokens:
        idf = model.token_idf.get(tok, model.default_idf)
        denom += idf
        per_intent = model.token_weights.get(tok)
        if per_intent:
            for intent, w in per_intent.items():
                totals[intent] += idf * w
    if denom == 0.0:
        return {i: 0.0 for i in INTENTS}
    return {i: totals[i] / denom for i in INTENTS}


def classify(model: NluModel, utterance: str) -> tuple[tuple[str, float], ...]:
    """Rank all intents for an utterance, confidences normalized to sum 1.

    Deterministic: ties in score break alphabetically. An utterance whose
    normal form was memorized verbatim classifies with confidence 1.0.
    """
    if not utterance or not utterance.strip():
        raise InvalidUtteranceError("cannot classify an empty utterance")
    tokens = tokenize(utterance)
    key = " ".join(tokens)
    memorized = model.exact.get(key)
    if memorized is not None:
        ranked = [(memorized, 1.0)]
        ranked += [(i, 0.0) for i in INTENTS if i != memorized]
        return tuple(ranked)

    raw = _scores(model, tokens)
    # squared-score normalization sharpens the winner's margin without
    # changing the ranking; shared stopwords stop diluting clear matches
    total = sum(s * s for s in raw.values())
    if total > 0:
        conf = {i: s * s / total for i, s in raw.items()}
    else:
        conf = {i: 0.0 for i in INTENTS}
    ordered = sorted(INTENTS, key=lambda i: (-conf[i], i))
    return tuple((i, conf[i]) for i in ordered)


# ---------------------------------------------------------------------------
# monitor reference resolution

_ORDINALS = {
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9,
}
_CARDINAL_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9,
}
_VERTICAL = {"upper": 1, "top": 1, "lower": 3, "bottom": 3, "middle": 2, "center": 2, "centre": 2}
_HORIZONTAL = {"left": 1, "right": 3, "middle": 2, "center": 2, "centre": 2}
_COMPASS_ROW = {"north": 1, "south": 3}
_COMPASS_COL = {"west": 1, "east": 3}


def resolve_monitor_reference(
    span: Optional[EntitySpan] = None,
    *,
    ref: Optional[int] = None,
    row: Optional[int] = None,
    col: Optional[int] = None,
) -> int:
    """Map a monitor reference to its id, row-major with row 1 on top.

    Accepts either a composite monitor EntitySpan (resolved through its
    ref / ref_x / ref_y children) or the payloads directly. Coordinates
    are (row, col).
    """
    if span is not None:
        for child in span.children:
            if child.label == "ref":
                ref = int(child.value)  # type: ignore[arg-type]
            elif child.label == "ref_x":
                row = int(child.value)  # type: ignore[arg-type]
            elif child.label == "ref_y":
                col = int(child.value)  # type: ignore[arg-type]
    if ref is not None:
        if not 1 <= ref <= GRID_ROWS * GRID_COLS:
            raise OutOfGridError(f"monitor number {ref} outside 1..{GRID_ROWS * GRID_COLS}")
        return ref
    if row is None or col is None:
        raise NluError("monitor reference carries neither ref nor (ref_x, ref_y)")
    if not (1 <= row <= GRID_ROWS and 1 <= col <= GRID_COLS):
        raise OutOfGridError(f"grid coordinates ({row},{col}) outside 1..3")
    return (row - 1) * GRID_COLS + col


# ---------------------------------------------------------------------------
# entity extraction

_NOUN = r"(?:monitor|camera|screen|view|video|cell|feed)"

_COORD_RE = re.compile(
    rf"(?:(?:the\s+)?{_NOUN}\s+(?:(?:in|at)\s+)?)?\(\s*(?P<x>\d)\s*,\s*(?P<y>\d)\s*\)"
)
_NUMBERED_RE = re.compile(
    rf"\b{_NOUN}\s+(?:number\s+)?(?P<n>\d|one|two|three|four|five|six|seven|eight|nine)\b"
)
_ORDINAL_RE = re.compile(
    rf"\b(?P<ord>first|second|third|fourth|fifth|sixth|seventh|eighth|ninth)\s+(?:{_NOUN}|one)\b"
)
_POSITIONAL_RE = re.compile(
    rf"\b(?P<v>upper|top|lower|bottom)[-\s]+(?P<h>left|right|middle|center|centre)\s+(?:{_NOUN}|one|corner)\b"
)
_COMPASS_RE = re.compile(
    rf"\b(?P<ns>north|south)\s*[/\-]?\s*(?P<ew>west|east)?\s+(?:{_NOUN}|one)\b"
    rf"|\b(?P<ew2>west|east)\s+(?:{_NOUN}|one)\b"
)
_CENTER_RE = re.compile(
    rf"\b(?:central|center|centre|middle)\s+(?:{_NOUN}|one)\b"
    rf"|\b{_NOUN}\s+(?:at|in)\s+the\s+(?:center|centre|middle)\b"
)
_LAST_RE = re.compile(rf"\blast\s+(?:{_NOUN}|one)\b")
_BARE_NOUN_RE = re.compile(rf"\b(?:the\s+)?{_NOUN}\b")

_DEICTIC_SG_RE = re.compile(
    rf"\b(?:this|that)(?:\s+(?:{_NOUN}|one))?\b"
)
_DEICTIC_PL_RE = re.compile(
    rf"\b(?:these|those)(?:\s+(?:two|pair|ones|{_NOUN}s?))?\b|\bboth(?:\s+of\s+them)?\b|\bthem\b"
)

_DEVICE_RE = re.compile(r"\b(?P<dev>headset|headphones?|earphones?|speakers?|loudspeakers?)\b")

_TIME_RE = re.compile(
    r"\b(?P<n>\d+|one|two|three|four|five|ten|fifteen|twenty|thirty|forty|fifty|sixty|half)\s+"
    r"(?:a\s+)?(?P<unit>seconds?|secs?|minutes?|mins?)\b"
    r"|\ba\s+(?P<unit2>minute|second)\b"
)

_TIME_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "ten": 10,
    "fifteen": 15, "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50, "sixty": 60,
}


def _monitor_span(start: int, end: int, children: list[EntitySpan]) -> EntitySpan:
    try:
        value: Optional[int] = resolve_monitor_reference(
            EntitySpan("monitor", start, end, None, children=tuple(children))
        )
    except OutOfGridError:
        value = None
    confidence = 1.0 if value is not None else 0.5
    return EntitySpan("monitor", start, end, value, confidence, tuple(children))


def _match_monitors(text: str) -> list[EntitySpan]:
    found: list[EntitySpan] = []

    for m in _COORD_RE.finditer(text):
        children = [
            EntitySpan("ref_x", m.start("x"), m.end("x"), int(m.group("x"))),
            EntitySpan("ref_y", m.start("y"), m.end("y"), int(m.group("y"))),
        ]
        found.append(_monitor_span(m.start(), m.end(), children))

    for m in _NUMBERED_RE.finditer(text):
        word = m.group("n")
        n = int(word) if word.isdigit() else _CARDINAL_WORDS[word]
        children = [EntitySpan("ref", m.start("n"), m.end("n"), n)]
        found.append(_monitor_span(m.start(), m.end(), children))

    for m in _ORDINAL_RE.finditer(text):
        n = _ORDINALS[m.group("ord")]
        children = [EntitySpan("ref", m.start("ord"), m.end("ord"), n)]
        found.append(_monitor_span(m.start(), m.end(), children))

    for m in _POSITIONAL_RE.finditer(text):
        row = _VERTICAL[m.group("v")]
        col = _HORIZONTAL[m.group("h")]
        children = [
            EntitySpan("ref_x", m.start("v"), m.end("v"), row),
            EntitySpan("ref_y", m.start("h"), m.end("h"), col),
        ]
        found.append(_monitor_span(m.start(), m.end(), children))

    for m in _COMPASS_RE.finditer(text):
        if m.group("ew2"):
            row, col = 2, _COMPASS_COL[m.group("ew2")]
            cs, ce = m.start("ew2"), m.end("ew2")
            children = [
                EntitySpan("ref_x", cs, ce, row),
                EntitySpan("ref_y", cs, ce, col),
            ]
        else:
            row = _COMPASS_ROW[m.group("ns")]
            if m.group("ew"):
                col = _COMPASS_COL[m.group("ew")]
                children = [
                    EntitySpan("ref_x", m.start("ns"), m.end("ns"), row),
                    EntitySpan("ref_y", m.start("ew"), m.end("ew"), col),
                ]
            else:
                col = 2  # bare north/south points at the row's middle cell
                children = [
                    EntitySpan("ref_x", m.start("ns"), m.end("ns"), row),
                    EntitySpan("ref_y", m.start("ns"), m.end("ns"), col),
                ]
        found.append(_monitor_span(m.start(), m.end(), children))

    for m in _CENTER_RE.finditer(text):
        children = [
            EntitySpan("ref_x", m.start(), m.end(), 2),
            EntitySpan("ref_y", m.start(), m.end(), 2),
        ]
        found.append(_monitor_span(m.start(), m.end(), children))

    for m in _LAST_RE.finditer(text):
        children = [EntitySpan("ref", m.start(), m.end(), 9)]
        found.append(_monitor_span(m.start(), m.end(), children))

    return found


def extract_entities(model: NluModel, utterance: str) -> tuple[EntitySpan, ...]:
    """Pull domain entities out of an utterance.

    Longer, more specific matches win when spans overlap; an unresolvable
    monitor noun still yields a monitor span with value None and reduced
    confidence. The trained model is accepted for interface symmetry with
    classify; extraction itself is lexicon-driven.
    """
    if not utterance or not utterance.strip():
        raise InvalidUtteranceError("cannot extract entities from an empty utterance")
    text = utterance.lower()

    candidates: list[tuple[int, EntitySpan]] = []
    for span in _match_monitors(text):
        candidates.append((0, span))
    for m in _DEICTIC_PL_RE.finditer(text):
        candidates.append((1, EntitySpan("deictic_plural", m.start(), m.end(), "plural")))
    for m in _DEICTIC_SG_RE.finditer(text):
        candidates.append((2, EntitySpan("deictic_singular", m.start(), m.end(), "singular")))
    for m in _DEVICE_RE.finditer(text):
        dev = m.group("dev")
        name = "headset" if dev.startswith(("headset", "headphone", "earphone")) else "speakers"
        candidates.append((0, EntitySpan("device", m.start(), m.end(), name)))
    for m in _TIME_RE.finditer(text):
        if m.group("unit2"):
            seconds = 60.0 if m.group("unit2") == "minute" else 1.0
        else:
            word = m.group("n")
            qty = float(word) if word.isdigit() else float(_TIME_WORDS.get(word, 0))
            if word == "half":
                qty = 0.5
            seconds = qty * (60.0 if m.group("unit").startswith("min") else 1.0)
        if seconds > 0:
            candidates.append((0, EntitySpan("time_offset", m.start(), m.end(), seconds)))

    # prefer higher-priority, longer, earlier matches; drop overlaps
    candidates.sort(key=lambda c: (c[0], -c[1].length, c[1].start))
    chosen: list[EntitySpan] = []
    for _, span in candidates:
        if all(span.end <= other.start or span.start >= other.end for other in chosen):
            chosen.append(span)

    # leftover bare monitor nouns: mention without a resolvable reference
    for m in _BARE_NOUN_RE.finditer(text):
        span = EntitySpan("monitor", m.start(), m.end(), None, 0.4)
        if all(span.end <= other.start or span.start >= other.end for other in chosen):
            chosen.append(span)

    chosen.sort(key=lambda s: s.start)
    return tuple(chosen)


def interpret(
    model: NluModel, utterance: str, speech_start: int, speech_end: int
) -> NluResult:
    """Classify and extract in one pass, stamped with the speech interval."""
    return NluResult(
        text=utterance,
        speech_start=speech_start,
        speech_end=speech_end,
        intents=classify(model, utterance),
        entities=extract_entities(model, utterance),
    )


# ---------------------------------------------------------------------------
# persistence

def _span_to_dict(span: EntitySpan) -> dict:
    d = {
        "label": span.label,
        "start": span.start,
        "end": span.end,
        "value": span.value,
        "confidence": span.confidence,
    }
    if span.children:
        d["children"] = [_span_to_dict(c) for c in span.children]
    return d


def _span_from_dict(d: Mapping) -> EntitySpan:
    return EntitySpan(
        d["label"],
        d["start"],
        d["end"],
        d.get("value"),
        d.get("confidence", 1.0),
        tuple(_span_from_dict(c) for c in d.get("children", ())),
    )


def save_model(model: NluModel, path: Union[str, Path]) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "intents": list(INTENTS),
        "token_weights": {t: dict(w) for t, w in model.token_weights.items()},
        "token_idf": dict(model.token_idf),
        "exact": dict(model.exact),
        "default_idf": model.default_idf,
    }
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8")


def load_model(path: Union[str, Path]) -> NluModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise NluError(f"unsupported model format: {payload.get('format_version')}")
    return NluModel(
        payload["token_weights"],
        payload["token_idf"],
        payload["exact"],
        payload["default_idf"],
    )


def save_corpus(corpus: Iterable[LabeledUtterance], path: Union[str, Path]) -> None:
    """One JSON record per line: {text, intent, entities}."""
    with open(path, "w", encoding="utf-8") as fh:
        for utt in corpus:
            rec = {
                "text": utt.text,
                "intent": utt.intent,
                "entities": [_span_to_dict(s) for s in utt.entities],
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_corpus(path: Union[str, Path]) -> list[LabeledUtterance]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                out.append(
                    LabeledUtterance(
                        rec["text"],
                        rec["intent"],
                        tuple(_span_from_dict(s) for s in rec.get("entities", ())),
                    )
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise NluError(f"{path}:{line_no}: bad corpus record: {exc}") from exc
    return out
