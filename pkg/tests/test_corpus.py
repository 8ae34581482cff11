import gzip
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chronovec.corpus import (
    PAD,
    NgramRecord,
    PeriodizedCorpus,
    PeriodSpec,
    TokenFilter,
    Vocabulary,
    build_vocabulary,
    iter_records,
    load_corpus,
    parse_ngram_line,
    parse_text_line,
    read_corpus,
    read_vocabulary,
    write_corpus,
    write_vocabulary,
)
from chronovec.errors import (
    EmptyCorpusError,
    EmptyVocabularyError,
    NgramParseError,
    PeriodError,
    VocabularyLookupError,
)


def test_parse_ngram_line_ignores_volume_count():
    rec = parse_ngram_line("cat sat on the mat\t1991\t12\t8\n")
    assert rec.tokens == ("cat", "sat", "on", "the", "mat")
    assert rec.year == 1991 and rec.match_count == 12


@pytest.mark.parametrize("line", ["cat sat\t1991", "cat\tyear\t3", "cat\t1991\t0", "\t1991\t2"])
def test_parse_ngram_line_rejects(line):
    with pytest.raises(NgramParseError):
        parse_ngram_line(line)


def test_parse_text_line_strips_punctuation():
    rec = parse_text_line("1999\tHello, world! (again)")
    assert rec.tokens == ("Hello", "world", "again")
    assert rec.match_count == 1


def test_period_spec_layout():
    spec = PeriodSpec(1980, 2000, 10)
    assert spec.n_periods == 2
    assert spec.labels == ("1980-1989", "1990-1999")
    assert spec.period_of(1979) is None
    assert spec.period_of(1989) == 0
    assert spec.period_of(1990) == 1
    assert spec.period_of(2000) is None
    assert PeriodSpec(1990, 1992).labels == ("1990", "1991")
    decades = PeriodSpec(1900, 2000, 10)
    assert decades.n_periods == 10 and decades.period_of(1915) == 1


@pytest.mark.parametrize("args", [(1990, 1995, 2), (1990, 1991, 1), (1990, 1990, 1), (1990, 2000, 0)])
def test_period_spec_invalid(args):
    with pytest.raises(PeriodError):
        PeriodSpec(*args)


def test_token_filter():
    f = TokenFilter()
    assert f("Cat_NOUN") == "cat"
    assert f("_NOUN_") is PAD
    assert f("1999") is PAD
    assert f("<unk>") is PAD
    assert TokenFilter(lowercase=False)("Cat") == "Cat"
    assert TokenFilter(alpha_only=False)("b2b") == "b2b"


def test_filtered_tokens_keep_positions(tiny_corpus):
    rec = [r for r in tiny_corpus.records(1) if None in r.tokens][0]
    assert rec.tokens == ("the", "cat", "sat", None, "mat")


def test_duplicates_merge_and_order_does_not_matter():
    recs = [NgramRecord(("a", "b", "c"), 2000, 2), NgramRecord(("x", "b", "y"), 2001, 1),
            NgramRecord(("a", "b", "c"), 2000, 5)]
    spec = PeriodSpec(2000, 2002)
    c1 = PeriodizedCorpus.from_records(recs, spec)
    c2 = PeriodizedCorpus.from_records(list(reversed(recs)), spec)
    assert c1 == c2 and c1.fingerprint() == c2.fingerprint()
    assert [r.match_count for r in c1.records(0)] == [7]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["a", "b", "c", "d"]), st.sampled_from(["a", "b", "c"]),
                          st.integers(2000, 2003), st.integers(1, 9)), min_size=1, max_size=30),
       st.randoms(use_true_random=False))
def test_corpus_depends_only_on_multiset(rows, rnd):
    recs = [NgramRecord((a, "m", b), y, n) for a, b, y, n in rows]
    shuffled = recs[:]
    rnd.shuffle(shuffled)
    spec = PeriodSpec(2000, 2004)
    a = PeriodizedCorpus.from_records(recs, spec)
    b = PeriodizedCorpus.from_records(shuffled, spec)
    assert a == b
    assert a.total_weight() == sum(n for *_, n in rows)


def test_out_of_range_and_empty_records_dropped():
    recs = [NgramRecord(("a", "b"), 1990, 1), NgramRecord(("123", "456"), 2000, 1),
            NgramRecord(("a", "b"), 2001, 1)]
    c = PeriodizedCorpus.from_records(recs, PeriodSpec(2000, 2002), TokenFilter())
    assert len(c) == 1
    assert c.meta["dropped_out_of_range"] == 1 and c.meta["dropped_empty"] == 1


def test_token_counts_are_weighted(tiny_corpus):
    counts = tiny_corpus.token_counts(0)
    assert counts["cat"] == 3 + 1
    assert counts["sat"] == 3 + 2
    assert tiny_corpus.total_tokens(1) == 4 * 5 + 1 * 5 + 2 * 4
    assert tiny_corpus.total_weight() == 13


def test_load_corpus_formats(tmp_path):
    ng = tmp_path / "a.tsv.gz"
    with gzip.open(ng, "wt") as fh:
        fh.write("# comment\nThe_DET cat_NOUN sat\t2000\t3\t1\nbroken line\ndog sat\t2001\t2\t2\n")
    txt = tmp_path / "b.txt"
    txt.write_text("2000\tThe cat, sat.\n")
    c = load_corpus([ng, txt], PeriodSpec(2000, 2002))
    assert c.meta["skipped_lines"] == 1
    assert c.token_counts(0)["cat"] == 4
    assert [r.tokens for r in c.records(1)] == [("dog", "sat")]


def test_iter_records_raise_reports_line(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("a b\t2000\t1\nbad\tline\tx\n")
    with pytest.raises(NgramParseError) as info:
        list(iter_records(p, "ngram", on_error="raise"))
    assert info.value.lineno == 2 and str(p) in str(info.value)


def test_empty_corpus(tmp_path):
    p = tmp_path / "c.tsv"
    p.write_text("a b\t1950\t1\n")
    with pytest.raises(EmptyCorpusError):
        load_corpus(p, PeriodSpec(2000, 2002))


@pytest.mark.parametrize("name", ["c.tsv", "c.tsv.gz"])
def test_write_read_corpus_round_trip(tmp_path, tiny_corpus, name):
    p = tmp_path / name
    write_corpus(tiny_corpus, p, {"note": "x"})
    back = read_corpus(p)
    assert back == tiny_corpus
    first = p.read_bytes()
    write_corpus(tiny_corpus, p, {"note": "x"})
    assert p.read_bytes() == first


def test_select_and_replace_segments(tiny_corpus):
    with pytest.raises(PeriodError):
        tiny_corpus.select_periods(["2001"])  # a corpus always has >= 2 periods
    with pytest.raises(PeriodError):
        tiny_corpus.replace_segments([tiny_corpus.segments[1], tiny_corpus.segments[0]])
    with pytest.raises(PeriodError):
        tiny_corpus.period_index("1999")


def test_vocabulary_order_and_limits(tiny_corpus):
    v = build_vocabulary(tiny_corpus, min_count=1)
    counts = tiny_corpus.token_counts()
    assert list(v.words) == sorted(counts, key=lambda w: (-counts[w], w))
    assert len(build_vocabulary(tiny_corpus, 1, max_size=3)) == 3
    assert "to" not in build_vocabulary(tiny_corpus, min_count=2)
    with pytest.raises(EmptyVocabularyError):
        build_vocabulary(tiny_corpus, min_count=10**6)
    with pytest.raises(VocabularyLookupError):
        v.id("zebra")


def test_vocabulary_round_trip(tmp_path, tiny_corpus):
    v = build_vocabulary(tiny_corpus, 1)
    write_vocabulary(v, tmp_path / "v.tsv", {"min_count": 1})
    assert read_vocabulary(tmp_path / "v.tsv") == v


def test_vocabulary_tie_break():
    v = Vocabulary.from_counts({"b": 2, "a": 2, "c": 3})
    assert v.words == ("c", "a", "b")


def test_middle_token():
    assert NgramRecord(tuple("abcde"), 2000).middle() == "c"
    assert NgramRecord(tuple("abcd"), 2000).middle() is None


def test_shuffled_file_order_same_corpus(tmp_path):
    lines = [f"w{i % 7} x{i % 3} y\t{2000 + i % 2}\t{1 + i % 4}" for i in range(40)]
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    a.write_text("\n".join(lines) + "\n")
    random.Random(1).shuffle(lines)
    b.write_text("\n".join(lines) + "\n")
    spec = PeriodSpec(2000, 2002)
    tf = TokenFilter(alpha_only=False)
    assert load_corpus(a, spec, tf) == load_corpus(b, spec, tf)
