"""Time-stamped corpus ingestion: parsing, period bucketing and vocabularies."""

from __future__ import annotations

import gzip
import hashlib
import io
import logging
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

from .errors import (
    EmptyCorpusError,
    EmptyVocabularyError,
    NgramParseError,
    PeriodError,
    VocabularyLookupError,
)

log = logging.getLogger(__name__)

# Placeholder for a token removed by the filter. Keeps n-gram positions intact,
# so window distances and the middle-token convention survive filtering.
PAD = None
PAD_TEXT = "<unk>"

_POS_SUFFIX = re.compile(r"_(NOUN|VERB|ADJ|ADV|PRON|DET|ADP|NUM|CONJ|PRT|X|\.)$")
_POS_TOKEN = re.compile(r"^_[A-Z.]+_$")


@dataclass(frozen=True)
class NgramRecord:
    tokens: tuple
    year: int
    match_count: int = 1

    def __post_init__(self):
        if len(self.tokens) == 0:
            raise ValueError("record has no tokens")
        if self.match_count < 1:
            raise ValueError(f"match_count must be >= 1, got {self.match_count}")

    def middle(self):
        """Middle token of an odd-length record, else ``None``."""
        n = len(self.tokens)
        return self.tokens[n // 2] if n % 2 == 1 else None


@dataclass(frozen=True)
class PeriodSpec:
    """Half-open year range ``[start_year, end_year)`` cut into equal periods."""

    start_year: int
    end_year: int
    period_length: int = 1

    def __post_init__(self):
        if self.period_length < 1:
            raise PeriodError("period_length must be >= 1")
        if self.end_year <= self.start_year:
            raise PeriodError("end_year must exceed start_year")
        span = self.end_year - self.start_year
        if span % self.period_length:
            raise PeriodError(
                f"year span {span} is not divisible by period_length {self.period_length}"
            )
        if span // self.period_length < 2:
            raise PeriodError("at least two periods are required")

    @property
    def n_periods(self) -> int:
        return (self.end_year - self.start_year) // self.period_length

    def period_of(self, year: int) -> Optional[int]:
        if year < self.start_year or year >= self.end_year:
            return None
        return (year - self.start_year) // self.period_length

    def label(self, t: int) -> str:
        lo = self.start_year + t * self.period_length
        if self.period_length == 1:
            return str(lo)
        return f"{lo}-{lo + self.period_length - 1}"

    @property
    def labels(self) -> tuple:
        return tuple(self.label(t) for t in range(self.n_periods))

    def first_year(self, t: int) -> int:
        return self.start_year + t * self.period_length


@dataclass(frozen=True)
class TokenFilter:
    lowercase: bool = True
    strip_pos_tags: bool = True
    alpha_only: bool = True

    def __call__(self, token: str):
        if token == PAD_TEXT:
            return PAD
        if self.strip_pos_tags:
            if _POS_TOKEN.match(token):
                return PAD
            token = _POS_SUFFIX.sub("", token)
        if self.lowercase:
            token = token.lower()
        if not token or (self.alpha_only and not token.isalpha()):
            return PAD
        return token

    def apply(self, tokens: Sequence[str]) -> tuple:
        return tuple(self(tok) for tok in tokens)


def parse_ngram_line(line: str, lineno: Optional[int] = None) -> NgramRecord:
    """Parse one Google Books n-gram line.

    The format is ``ngram TAB year TAB match_count [TAB volume_count]``; the
    volume count is ignored.

    >>> parse_ngram_line("cat sat on the mat\\t1991\\t12\\t8").match_count
    12
    """
    fields = line.rstrip("\r\n").split("\t")
    if len(fields) < 3:
        raise NgramParseError(f"expected >= 3 tab-separated fields, got {len(fields)}", lineno)
    tokens = tuple(fields[0].split())
    if not tokens:
        raise NgramParseError("empty n-gram field", lineno)
    try:
        year = int(fields[1])
        count = int(fields[2])
    except ValueError:
        raise NgramParseError(
            f"year and match_count must be integers: {fields[1]!r}, {fields[2]!r}", lineno
        ) from None
    if count < 1:
        raise NgramParseError(f"match_count must be >= 1, got {count}", lineno)
    return NgramRecord(tokens, year, count)


def parse_text_line(line: str, lineno: Optional[int] = None) -> NgramRecord:
    """Parse a ``YEAR TAB sentence`` line; each line has weight 1."""
    fields = line.rstrip("\r\n").split("\t", 1)
    if len(fields) != 2:
        raise NgramParseError("expected 'YEAR<TAB>sentence'", lineno)
    try:
        year = int(fields[0])
    except ValueError:
        raise NgramParseError(f"year must be an integer: {fields[0]!r}", lineno) from None
    tokens = tuple(
        tok for tok in (t.strip(string.punctuation) for t in fields[1].split()) if tok
    )
    if not tokens:
        raise NgramParseError("empty sentence", lineno)
    return NgramRecord(tokens, year, 1)


def _open_text(path: Path):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, encoding="utf-8")


def _sniff_format(path: Path) -> str:
    with _open_text(path) as fh:
        for line in fh:
            if not line.strip() or line.startswith("#"):
                continue
            return "ngram" if line.count("\t") >= 2 else "text"
    return "ngram"


def iter_records(path, fmt: str = "auto", on_error: str = "skip", stats: Optional[Counter] = None) -> Iterator[NgramRecord]:
    """Stream records from one file (optionally gzip-compressed).

    Lines starting with ``#`` are comments. Malformed lines either raise
    (``on_error="raise"``) or are skipped and tallied in ``stats["skipped"]``.
    """
    path = Path(path)
    if fmt == "auto":
        fmt = _sniff_format(path)
    parse = {"ngram": parse_ngram_line, "text": parse_text_line}[fmt]
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.startswith("#"):
                continue
            try:
                yield parse(line, lineno)
            except NgramParseError as exc:
                if on_error == "raise":
                    raise NgramParseError(exc.message, lineno, str(path)) from None
                if stats is not None:
                    stats["skipped"] += 1


def _record_key(rec: NgramRecord):
    return (rec.year, tuple("" if tok is None else tok for tok in rec.tokens))


@dataclass(frozen=True, eq=False)
class PeriodizedCorpus:
    """Weighted records bucketed into consecutive periods.

    Identical (tokens, year) records are merged by summing match counts and
    each segment is kept in canonical sorted order, so the corpus depends only
    on the multiset of input lines, not on file order.
    """

    spec: PeriodSpec
    segments: tuple
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_records(cls, records: Iterable[NgramRecord], spec: PeriodSpec,
                     token_filter: Optional[TokenFilter] = None, meta=None) -> "PeriodizedCorpus":
        merged: dict = {}
        dropped_range = dropped_empty = 0
        for rec in records:
            t = spec.period_of(rec.year)
            if t is None:
                dropped_range += 1
                continue
            tokens = token_filter.apply(rec.tokens) if token_filter else tuple(rec.tokens)
            if all(tok is PAD for tok in tokens):
                dropped_empty += 1
                continue
            key = (rec.year, tokens)
            merged[key] = merged.get(key, 0) + rec.match_count
        buckets = [[] for _ in range(spec.n_periods)]
        for (year, tokens), count in merged.items():
            buckets[spec.period_of(year)].append(NgramRecord(tokens, year, count))
        segments = tuple(tuple(sorted(b, key=_record_key)) for b in buckets)
        info = dict(meta or {})
        info.setdefault("dropped_out_of_range", dropped_range)
        info.setdefault("dropped_empty", dropped_empty)
        return cls(spec, segments, info)

    @property
    def periods(self) -> tuple:
        return self.spec.labels

    @property
    def n_periods(self) -> int:
        return len(self.segments)

    def period_index(self, period) -> int:
        """Resolve a period given as index or label."""
        if isinstance(period, (int,)) and not isinstance(period, bool):
            if 0 <= period < self.n_periods:
                return int(period)
        else:
            labels = self.periods
            if str(period) in labels:
                return labels.index(str(period))
        raise PeriodError(f"unknown period {period!r}; known: {', '.join(self.periods)}")

    def records(self, period=None) -> Iterator[NgramRecord]:
        if period is None:
            for seg in self.segments:
                yield from seg
        else:
            yield from self.segments[self.period_index(period)]

    def __len__(self):
        return sum(len(s) for s in self.segments)

    def __eq__(self, other):
        if not isinstance(other, PeriodizedCorpus):
            return NotImplemented
        return self.spec == other.spec and self.segments == other.segments

    def __hash__(self):
        return hash((self.spec, self.segments))

    def token_counts(self, period=None) -> Counter:
        """Match-count weighted token frequencies (placeholders excluded)."""
        counts: Counter = Counter()
        for rec in self.records(period):
            for tok in rec.tokens:
                if tok is not PAD:
                    counts[tok] += rec.match_count
        return counts

    def total_tokens(self, period=None) -> int:
        return sum(
            rec.match_count * sum(tok is not PAD for tok in rec.tokens)
            for rec in self.records(period)
        )

    def total_weight(self, period=None) -> int:
        return sum(rec.match_count for rec in self.records(period))

    def replace_segments(self, segments, meta=None) -> "PeriodizedCorpus":
        segs = tuple(tuple(sorted(s, key=_record_key)) for s in segments)
        for t, seg in enumerate(segs):
            for rec in seg:
                if self.spec.period_of(rec.year) != t:
                    raise PeriodError(f"record year {rec.year} does not belong to period {t}")
        return PeriodizedCorpus(self.spec, segs, dict(meta if meta is not None else self.meta))

    def select_periods(self, periods) -> "PeriodizedCorpus":
        """Sub-corpus restricted to consecutive periods ``periods``."""
        idx = sorted(self.period_index(p) for p in periods)
        if idx != list(range(idx[0], idx[0] + len(idx))):
            raise PeriodError("selected periods must be consecutive")
        spec = PeriodSpec(
            self.spec.first_year(idx[0]),
            self.spec.first_year(idx[-1]) + self.spec.period_length,
            self.spec.period_length,
        )
        return PeriodizedCorpus(spec, tuple(self.segments[i] for i in idx), dict(self.meta))

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.spec.start_year}:{self.spec.end_year}:{self.spec.period_length}\n".encode())
        for rec in self.records():
            toks = " ".join(PAD_TEXT if t is None else t for t in rec.tokens)
            h.update(f"{toks}\t{rec.year}\t{rec.match_count}\n".encode())
        return h.hexdigest()[:16]


def load_corpus(sources, spec: PeriodSpec, token_filter: Optional[TokenFilter] = None,
                fmt: str = "auto", on_error: str = "skip") -> PeriodizedCorpus:
    """Read n-gram or ``YEAR<TAB>sentence`` files into a periodized corpus.

    Records outside ``[start_year, end_year)`` are dropped; record year ``y``
    lands in period ``(y - start_year) // period_length``.
    """
    if token_filter is None:
        token_filter = TokenFilter()
    if isinstance(sources, (str, Path)):
        sources = [sources]
    stats: Counter = Counter()

    def _all():
        for src in sources:
            try:
                yield from iter_records(src, fmt, on_error, stats)
            except OSError as exc:
                raise OSError(f"cannot read corpus file {src}: {exc}") from exc

    corpus = PeriodizedCorpus.from_records(_all(), spec, token_filter,
                                           meta={"sources": [str(s) for s in sources]})
    # the record generator has been consumed, so the tally is final
    corpus.meta["skipped_lines"] = stats["skipped"]
    if len(corpus) == 0:
        raise EmptyCorpusError("empty corpus: no records inside the configured year range")
    if stats["skipped"]:
        log.warning("skipped %d malformed lines", stats["skipped"])
    return corpus


def _text_writer(path: Path):
    if path.suffix == ".gz":
        # fixed mtime so identical content gives identical bytes
        return io.TextIOWrapper(gzip.GzipFile(path, "wb", mtime=0), encoding="utf-8", newline="\n")
    return open(path, "w", encoding="utf-8", newline="\n")


def write_corpus(corpus: PeriodizedCorpus, path, header: Optional[dict] = None) -> None:
    """Write a corpus as n-gram TSV (``<unk>`` marks filtered positions)."""
    spec = corpus.spec
    with _text_writer(Path(path)) as fh:
        fh.write("# chronovec-corpus v1\n")
        fh.write(f"# period_spec: {spec.start_year} {spec.end_year} {spec.period_length}\n")
        for key, value in (header or {}).items():
            fh.write(f"# {key}: {value}\n")
        for rec in corpus.records():
            toks = " ".join(PAD_TEXT if t is None else t for t in rec.tokens)
            fh.write(f"{toks}\t{rec.year}\t{rec.match_count}\n")


def read_corpus(path, spec: Optional[PeriodSpec] = None) -> PeriodizedCorpus:
    """Load a file written by :func:`write_corpus`; the period layout comes from its header."""
    path = Path(path)
    if spec is None:
        with _open_text(path) as fh:
            for line in fh:
                if not line.startswith("#"):
                    break
                if line.startswith("# period_spec:"):
                    a, b, c = line.split(":", 1)[1].split()
                    spec = PeriodSpec(int(a), int(b), int(c))
        if spec is None:
            raise PeriodError(f"{path}: no period_spec header; pass the period layout explicitly")
    keep_as_is = TokenFilter(lowercase=False, strip_pos_tags=False, alpha_only=False)
    return load_corpus(path, spec, keep_as_is, fmt="ngram", on_error="raise")


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """Ordered word list: descending count, ties broken lexicographically."""

    words: tuple
    counts: dict

    def __post_init__(self):
        object.__setattr__(self, "index", {w: i for i, w in enumerate(self.words)})

    @classmethod
    def from_counts(cls, counts, min_count: int = 1, max_size: Optional[int] = None) -> "Vocabulary":
        kept = [(w, c) for w, c in counts.items() if c >= min_count]
        kept.sort(key=lambda wc: (-wc[1], wc[0]))
        if max_size is not None:
            kept = kept[:max_size]
        if not kept:
            raise EmptyVocabularyError(
                f"vocabulary is empty (min_count={min_count}, max_size={max_size})"
            )
        return cls(tuple(w for w, _ in kept), {w: c for w, c in kept})

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def __iter__(self):
        return iter(self.words)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.words == other.words and self.counts == other.counts

    def __hash__(self):
        return hash(self.words)

    def id(self, word: str) -> int:
        try:
            return self.index[word]
        except KeyError:
            raise VocabularyLookupError(f"word not in vocabulary: {word!r}") from None

    def get(self, word, default=-1) -> int:
        return self.index.get(word, default)


def build_vocabulary(corpus: PeriodizedCorpus, min_count: int = 5,
                     max_size: Optional[int] = None) -> Vocabulary:
    """Vocabulary over all periods from match-count weighted token counts."""
    if len(corpus) == 0:
        raise EmptyCorpusError("cannot build a vocabulary from an empty corpus")
    return Vocabulary.from_counts(corpus.token_counts(), min_count, max_size)


def write_vocabulary(vocab: Vocabulary, path, header: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# chronovec-vocab v1\n")
        for key, value in (header or {}).items():
            fh.write(f"# {key}: {value}\n")
        for w in vocab.words:
            fh.write(f"{w}\t{vocab.counts[w]}\n")


def read_vocabulary(path) -> Vocabulary:
    words, counts = [], {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip() or line.startswith("#"):
                continue
            w, c = line.rstrip("\n").split("\t")
            words.append(w)
            counts[w] = int(c)
    if not words:
        raise EmptyVocabularyError(f"{path}: no words")
    return Vocabulary(tuple(words), counts)
