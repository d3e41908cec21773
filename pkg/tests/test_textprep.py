"""Cleaning-pipeline and corpus-statistics tests."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frozenclf.textprep import (
    CorpusFormatError,
    RawTweet,
    clean,
    clean_text,
    corpus_stats,
    default_rules,
    detect_outliers,
    load_rules,
    ordinal_words,
    read_corpus_tsv,
    write_corpus_tsv,
)


@pytest.fixture(scope="module")
def rules():
    return default_rules()


# ---------------------------------------------------------------------------
# the pipeline end to end


def test_mentions_ordinals_urls_and_contractions(rules):
    text, tokens = clean_text("@user you're 2nd https://t.co/x", rules)
    assert text == "you are second"
    assert tokens == ("you", "are", "second")


def test_abbreviation_expansion(rules):
    text, _ = clean_text("MAGA", rules)
    assert text == "make america great again"


def test_camel_case_hashtag_split(rules):
    text, _ = clean_text("#BuildTheWall", rules)
    assert text == "build the wall"


def test_lowercase_maga_survives(rules):
    # abbreviation matching is case-sensitive, so the lowercase form stays
    text, _ = clean_text("maga", rules)
    assert text == "maga"


def test_genitive_removed(rules):
    text, _ = clean_text("Trump's wife", rules)
    assert text == "trump wife"


def test_unicode_apostrophe_removed(rules):
    text, _ = clean_text("you’re fine", rules)
    assert text == "you are fine"


def test_dashes_normalized(rules):
    text, _ = clean_text("left — right – center -- done", rules)
    assert text == "left - right - center - done"


def test_emoji_replaced_by_name(rules):
    text, _ = clean_text("nice \U0001F525 day", rules)
    assert text == "nice fire day"


def test_all_caps_token_not_split(rules):
    text, _ = clean_text("GO HOME", rules)
    assert text == "go home"


def test_plain_hashtag_dehashed(rules):
    text, _ = clean_text("#winning", rules)
    assert text == "winning"


def test_obamacare_expansion(rules):
    text, _ = clean_text("Obamacare is gone", rules)
    assert text == "obama healthcare system is gone"


def test_clean_returns_clean_tweet(rules):
    out = clean(RawTweet(id="1", text="@x Hello", label=0, language="en"), rules)
    assert out.id == "1"
    assert out.tokens == ("hello",)


def test_clean_is_total_on_empty_remainder(rules):
    text, tokens = clean_text("@user https://t.co/x", rules)
    assert text == "" and tokens == ()


@given(st.text(alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd", "Po", "Zs"),
                                      whitelist_characters="@#'’–—"),
               max_size=80))
@settings(max_examples=150, deadline=None)
def test_clean_idempotent_and_free_of_banned_substrings(text):
    rules = default_rules()
    cleaned, tokens = clean_text(text, rules)
    for tok in tokens:
        assert "@" not in tok
        assert "http" not in tok
        assert "'" not in tok and "’" not in tok
    again, tokens2 = clean_text(cleaned, rules)
    assert tokens2 == tokens


def test_ordinal_words_table():
    assert ordinal_words(1) == "first"
    assert ordinal_words(2) == "second"
    assert ordinal_words(3) == "third"
    assert ordinal_words(12) == "twelfth"
    assert ordinal_words(21) == "twenty first"
    assert ordinal_words(100) == "one hundredth"
    assert ordinal_words(123) == "one hundred twenty third"
    assert ordinal_words(2000) == "two thousandth"
    assert ordinal_words(123456) is None


def test_rules_are_swappable_data(tmp_path, rules):
    (tmp_path / "contractions.tsv").write_text("youre\tYOU AND I ARE\n", encoding="utf-8")
    (tmp_path / "abbreviations.tsv").write_text("ZZZ\tsleepy\n", encoding="utf-8")
    (tmp_path / "emoji.tsv").write_text("\U0001F525\tflame\n", encoding="utf-8")
    custom = load_rules(tmp_path)
    assert clean_text("you're ZZZ \U0001F525", custom)[0] == "you and i are sleepy flame"
    assert clean_text("MAGA", custom)[0] == "maga"  # not in the custom table


# ---------------------------------------------------------------------------
# statistics


def _tweet(i, text, label=0, lang="en"):
    return RawTweet(id=str(i), text=text, label=label, language=lang)


def test_single_tweet_caps_and_bang_counts():
    stats = corpus_stats({"train": [_tweet(1, "GO HOME now!")]})
    group = stats.groups[("train", 0)]
    assert group.allcaps_mean == 2.0
    assert group.special_char_means["!"] == 1.0
    assert group.word_mean == 3.0


def test_no_punctuation_counts_zero():
    stats = corpus_stats({"train": [_tweet(1, "plain words only")]})
    group = stats.groups[("train", 0)]
    assert all(v == 0.0 for v in group.special_char_means.values())


def test_duplicated_corpus_keeps_mean_and_sd():
    tweets = [_tweet(1, "a b c"), _tweet(2, "d e f g h")]
    one = corpus_stats({"s": tweets}).groups[("s", 0)]
    two = corpus_stats({"s": tweets + [_tweet(3, "a b c"), _tweet(4, "d e f g h")]}).groups[("s", 0)]
    assert one.word_mean == two.word_mean
    assert one.word_sd == pytest.approx(two.word_sd)


def test_groups_split_by_label():
    stats = corpus_stats({"s": [_tweet(1, "x", label=0), _tweet(2, "y z", label=1)]})
    assert stats.groups[("s", 0)].word_mean == 1.0
    assert stats.groups[("s", 1)].word_mean == 2.0


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        corpus_stats({})


# ---------------------------------------------------------------------------
# outliers


def test_outlier_detection():
    long_tweet = _tweet("big", " ".join(["w"] * 500))
    assert detect_outliers([long_tweet, _tweet(2, "short")], 150) == ["big"]


def test_outlier_huge_threshold_empty():
    assert detect_outliers([_tweet(1, "a b")], 10**6) == []


def test_outliers_450_and_197_words():
    tweets = [_tweet("a", " ".join(["w"] * 450)), _tweet("b", " ".join(["w"] * 197)),
              _tweet("c", " ".join(["w"] * 20))]
    assert detect_outliers(tweets, 150) == ["a", "b"]


# ---------------------------------------------------------------------------
# TSV I/O


def test_corpus_tsv_round_trip(tmp_path):
    tweets = [_tweet(1, "hello there", 1, "en"), _tweet(2, "hola", 0, "es")]
    path = tmp_path / "corpus.tsv"
    write_corpus_tsv(path, tweets)
    assert read_corpus_tsv(path) == tweets


def test_corpus_tsv_header_optional(tmp_path):
    path = tmp_path / "nohdr.tsv"
    path.write_text("7\tsome text\t1\ten\n", encoding="utf-8")
    tweets = read_corpus_tsv(path)
    assert tweets == [RawTweet(id="7", text="some text", label=1, language="en")]


def test_corpus_tsv_bad_row_reports_line(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("id\ttext\tHS\tlang\n1\tok\t1\ten\n2\tbroken row\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match="line 3"):
        read_corpus_tsv(path)


def test_corpus_tsv_bad_label(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("1\ttext\t7\ten\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match="label"):
        read_corpus_tsv(path)
