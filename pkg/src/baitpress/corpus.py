"""Line-delimited JSON corpus parsing: posts, truth labels, datasets.

File schemas follow the public challenge corpora so they load unmodified:
instances carry ``id``/``postText``/``target*`` keys, truth files carry
``id``/``truthJudgments`` (+ optional ``truthMean``, ``truthClass``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

CLICKBAIT = "clickbait"
NO_CLICKBAIT = "no-clickbait"

# Annotation scale; stored judgments are truncated thirds (0.33333...), so
# values within SNAP_TOLERANCE of a scale point are snapped onto it.
JUDGMENT_SCALE = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)
SNAP_TOLERANCE = 0.01


class CorpusFormatError(ValueError):
    """Malformed corpus input; carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


@dataclass(frozen=True)
class Post:
    id: str
    post_text: list[str] = field(default_factory=list)
    post_media: list[str] = field(default_factory=list)
    post_timestamp: str | None = None
    target_title: str = ""
    target_description: str = ""
    target_keywords: str = ""
    target_paragraphs: list[str] = field(default_factory=list)
    target_captions: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class TruthLabel:
    id: str
    judgments: tuple[float, ...]
    mean: float
    std: float
    truth_class: str


@dataclass(frozen=True)
class DatasetStats:
    n_posts: int
    n_clickbait: int | None = None
    n_no_clickbait: int | None = None


@dataclass(frozen=True)
class Dataset:
    posts: list[Post]
    labels: dict[str, TruthLabel] | None = None

    def __post_init__(self):
        if self.labels is None:
            return
        post_ids = {p.id for p in self.posts}
        missing = post_ids - self.labels.keys()
        extra = self.labels.keys() - post_ids
        if missing:
            raise CorpusFormatError(f"no truth label for post id {sorted(missing)[0]!r}")
        if extra:
            raise CorpusFormatError(f"truth label for unknown post id {sorted(extra)[0]!r}")

    def mean_targets(self) -> list[float]:
        assert self.labels is not None
        return [self.labels[p.id].mean for p in self.posts]

    def std_targets(self) -> list[float]:
        assert self.labels is not None
        return [self.labels[p.id].std for p in self.posts]


def _lines(stream: str | Iterable[str]) -> Iterable[tuple[int, str]]:
    lines = stream.splitlines() if isinstance(stream, str) else stream
    for line_no, line in enumerate(lines, start=1):
        if line.strip():
            yield line_no, line


def _load_object(line: str, line_no: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"invalid JSON ({exc.msg})", line_no) from exc
    if not isinstance(obj, dict):
        raise CorpusFormatError("expected a JSON object", line_no)
    return obj


def _require_id(obj: dict, line_no: int) -> str:
    raw = obj.get("id")
    if raw is None or (isinstance(raw, str) and not raw):
        raise CorpusFormatError('missing or empty "id"', line_no)
    return raw if isinstance(raw, str) else str(raw)


def _text(obj: dict, key: str, line_no: int) -> str:
    value = obj.get(key)
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        return str(value)
    raise CorpusFormatError(f'"{key}" must be a string', line_no)


def _text_list(obj: dict, key: str, line_no: int) -> list[str]:
    value = obj.get(key)
    if value is None:
        return []
    if isinstance(value, str):
        return [value]
    if isinstance(value, list):
        return [item if isinstance(item, str) else str(item) for item in value]
    raise CorpusFormatError(f'"{key}" must be a list of strings', line_no)


def parse_instances(stream: str | Iterable[str]) -> list[Post]:
    """Parse an instances file into posts, preserving line order.

    Absent keys default to empty strings/lists; unknown keys are ignored.
    Raises :class:`CorpusFormatError` on malformed lines or duplicate ids.
    """
    posts: list[Post] = []
    seen: set[str] = set()
    for line_no, line in _lines(stream):
        obj = _load_object(line, line_no)
        post_id = _require_id(obj, line_no)
        if post_id in seen:
            raise CorpusFormatError(f"duplicate post id {post_id!r}", line_no)
        seen.add(post_id)
        timestamp = obj.get("postTimestamp")
        posts.append(
            Post(
                id=post_id,
                post_text=_text_list(obj, "postText", line_no),
                post_media=_text_list(obj, "postMedia", line_no),
                post_timestamp=None if timestamp is None else str(timestamp),
                target_title=_text(obj, "targetTitle", line_no),
                target_description=_text(obj, "targetDescription", line_no),
                target_keywords=_text(obj, "targetKeywords", line_no),
                target_paragraphs=_text_list(obj, "targetParagraphs", line_no),
                target_captions=_text_list(obj, "targetCaptions", line_no),
            )
        )
    return posts


def _snap_judgment(value: float, line_no: int) -> float:
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise CorpusFormatError(f"judgment {value!r} is not a finite number", line_no)
    if value < -SNAP_TOLERANCE or value > 1.0 + SNAP_TOLERANCE:
        raise CorpusFormatError(f"judgment {value} outside [0, 1]", line_no)
    for point in JUDGMENT_SCALE:
        if abs(value - point) <= SNAP_TOLERANCE:
            return point
    raise CorpusFormatError(f"judgment {value} not on the annotation scale", line_no)


def make_label(post_id: str, judgments: Iterable[float], line_no: int | None = None) -> TruthLabel:
    """Build a label from raw judgments: snap, then derive mean/std/class."""
    snapped = tuple(_snap_judgment(v, line_no) for v in judgments)
    if not snapped:
        raise CorpusFormatError("empty judgment array", line_no)
    mean = sum(snapped) / len(snapped)
    var = sum((v - mean) ** 2 for v in snapped) / len(snapped)
    return TruthLabel(
        id=post_id,
        judgments=snapped,
        mean=mean,
        std=math.sqrt(var),
        truth_class=CLICKBAIT if mean > 0.5 else NO_CLICKBAIT,
    )


def parse_truth(stream: str | Iterable[str]) -> dict[str, TruthLabel]:
    """Parse a truth file into a map id -> label.

    Mean and std are recomputed from the snapped judgments; a stored
    ``truthMean`` differing from the recomputed mean by more than 0.01 is an
    error.
    """
    labels: dict[str, TruthLabel] = {}
    for line_no, line in _lines(stream):
        obj = _load_object(line, line_no)
        post_id = _require_id(obj, line_no)
        if post_id in labels:
            raise CorpusFormatError(f"duplicate truth id {post_id!r}", line_no)
        judgments = obj.get("truthJudgments")
        if not isinstance(judgments, list):
            raise CorpusFormatError('missing "truthJudgments" array', line_no)
        label = make_label(post_id, judgments, line_no)
        stored_mean = obj.get("truthMean")
        if stored_mean is not None and abs(float(stored_mean) - label.mean) > 0.01:
            raise CorpusFormatError(
                f"stored truthMean {stored_mean} disagrees with recomputed {label.mean:.5f}",
                line_no,
            )
        labels[post_id] = label
    return labels


def derive_class(label: TruthLabel) -> str:
    """Clickbait iff mean > 0.5; the exact tie goes to no-clickbait."""
    return CLICKBAIT if label.mean > 0.5 else NO_CLICKBAIT


def dataset_stats(ds: Dataset) -> DatasetStats:
    if ds.labels is None:
        return DatasetStats(n_posts=len(ds.posts))
    n_clickbait = sum(1 for lab in ds.labels.values() if derive_class(lab) == CLICKBAIT)
    return DatasetStats(
        n_posts=len(ds.posts),
        n_clickbait=n_clickbait,
        n_no_clickbait=len(ds.posts) - n_clickbait,
    )


def post_to_json(post: Post) -> dict:
    obj = {
        "id": post.id,
        "postText": list(post.post_text),
        "postMedia": list(post.post_media),
        "targetTitle": post.target_title,
        "targetDescription": post.target_description,
        "targetKeywords": post.target_keywords,
        "targetParagraphs": list(post.target_paragraphs),
        "targetCaptions": list(post.target_captions),
    }
    if post.post_timestamp is not None:
        obj["postTimestamp"] = post.post_timestamp
    return obj


def instances_to_jsonl(posts: Iterable[Post]) -> str:
    return "".join(json.dumps(post_to_json(p), ensure_ascii=False) + "\n" for p in posts)


def load_instances(path: str) -> list[Post]:
    with open(path, encoding="utf-8") as fh:
        return parse_instances(fh)


def load_truth(path: str) -> dict[str, TruthLabel]:
    with open(path, encoding="utf-8") as fh:
        return parse_truth(fh)


def load_dataset(instances_path: str, truth_path: str | None = None) -> Dataset:
    posts = load_instances(instances_path)
    labels = load_truth(truth_path) if truth_path else None
    return Dataset(posts=posts, labels=labels)
