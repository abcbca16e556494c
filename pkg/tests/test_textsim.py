import difflib
import itertools
import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coordnet.textsim import longest_common_block, matched_characters, ratcliff_obershelp
from oracles import all_common_substrings, block_oracle, gestalt_oracle


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ("abab", "ab", (0, 0, 2)),
        ("xyz", "abc", (0, 0, 0)),
        ("abcd", "bcde", (1, 0, 3)),
        ("", "", (0, 0, 0)),
        ("", "abc", (0, 0, 0)),
        ("ab", "abab", (0, 0, 2)),
    ],
)
def test_longest_common_block_examples(a, b, expected):
    assert longest_common_block(a, b) == expected


def test_abcd_bcde_block_by_enumeration():
    # longest common substring of both strings is "bcd"
    common = all_common_substrings("abcd", "bcde")
    longest = max(common, key=len)
    assert longest == "bcd"
    assert block_oracle("abcd", "bcde") == (1, 0, 3)


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ("hello", "hello", 1.0),
        ("abcd", "bcde", 0.75),
        ("xyz", "abc", 0.0),
        ("", "", 1.0),
        ("", "abc", 0.0),
        ("abc", "", 0.0),
    ],
)
def test_ratcliff_obershelp_examples(a, b, expected):
    assert ratcliff_obershelp(a, b) == expected
    assert gestalt_oracle(a, b) == expected


def test_unicode_scalar_lengths():
    # one Arabic letter with a combining mark counts as two characters
    a = "بَاب"
    b = "بَا"
    assert ratcliff_obershelp(a, b) == 2 * 3 / 7
    assert ratcliff_obershelp("😀x", "😀y") == 0.5


def test_exhaustive_short_strings_against_oracle():
    words = ["".join(p) for n in range(5) for p in itertools.product("abc", repeat=n)]
    for a in words:
        for b in words:
            assert ratcliff_obershelp(a, b) == gestalt_oracle(a, b), (a, b)


def test_tie_break_affects_matches_deterministically():
    # "ab" occurs twice in a; picking the leftmost leaves "ab" unmatched on the right
    assert longest_common_block("abxab", "ab") == (0, 0, 2)
    assert matched_characters("abxab", "ab") == 2


text = st.text(alphabet="abc باé", max_size=12)


@given(text, text)
@settings(max_examples=400, deadline=None)
def test_matches_oracle_property(a, b):
    assert ratcliff_obershelp(a, b) == gestalt_oracle(a, b)


@given(text, text)
@settings(max_examples=300, deadline=None)
def test_score_at_least_longest_block(a, b):
    if not a and not b:
        return
    k = longest_common_block(a, b)[2]
    score = ratcliff_obershelp(a, b)
    assert 0.0 <= score <= 1.0
    assert score >= 2 * k / (len(a) + len(b))


@given(st.text(max_size=60))
@settings(max_examples=200, deadline=None)
def test_identity_scores_one(a):
    assert ratcliff_obershelp(a, a) == 1.0


@given(st.text(alphabet="abcd ", max_size=40), st.text(alphabet="abcd ", max_size=40))
@settings(max_examples=300, deadline=None)
def test_agrees_with_difflib_without_autojunk(a, b):
    expected = difflib.SequenceMatcher(None, a, b, autojunk=False).ratio()
    assert ratcliff_obershelp(a, b) == expected


def test_repeated_calls_identical():
    a, b = "the quick brown fox jumps", "a quick brown dog jumped"
    scores = {ratcliff_obershelp(a, b) for _ in range(50)}
    assert len(scores) == 1


def test_uncompiled_kernel_agrees():
    code = (
        "from coordnet.textsim import ratcliff_obershelp as r;"
        "print(r('abcd','bcde'), r('abxab','ab'), r('kitten sitting','sitting kitten'))"
    )
    env = dict(os.environ, NUMBA_DISABLE_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    expected = " ".join(
        repr(gestalt_oracle(a, b)) for a, b in [("abcd", "bcde"), ("abxab", "ab"), ("kitten sitting", "sitting kitten")]
    )
    assert out.stdout.strip() == expected
