import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coordnet.ingest import Diagnostic, Kind, TweetRecord
from coordnet.network import connected_components
from coordnet.retweet_net import build_rapid_retweet_network
from builders import retweet, stream, tweet


def test_two_rapid_retweets_kept():
    s = stream(
        tweet(1, "news", 100), retweet(2, "bot", 109, 1, "news", 100),
        tweet(3, "news", 200), retweet(4, "bot", 203, 3, "news", 200),
    )
    net = build_rapid_retweet_network(s)
    assert net.structure() == (True, {"bot": 2, "news": 0}, {("bot", "news"): 2})
    assert [(e.tweet_id, e.delta_t) for e in net.edges["bot", "news"].evidence] == [("2", 9), ("4", 3)]


def test_single_rapid_retweet_dropped():
    s = stream(tweet(1, "news", 100), retweet(2, "bot", 102, 1, "news", 100))
    net = build_rapid_retweet_network(s)
    assert net.edges == {} and net.strength == {}


def test_boundary_is_strict():
    s = stream(
        tweet(1, "news", 100), retweet(2, "bot", 110, 1, "news", 100),
        tweet(3, "news", 200), retweet(4, "bot", 211, 3, "news", 200),
    )
    assert build_rapid_retweet_network(s).edges == {}


def test_self_retweets_ignored():
    s = stream(tweet(1, "a", 0), retweet(2, "a", 1, 1, "a", 0), retweet(3, "a", 2, 1, "a", 0))
    assert build_rapid_retweet_network(s, min_weight=1).edges == {}


def test_missing_original_time_diagnosed():
    rec = TweetRecord("2", "bot", 5, "", Kind.RETWEET, "1", "news", None)
    diags: list[Diagnostic] = []
    net = build_rapid_retweet_network(stream(rec), min_weight=1, diagnostics=diags)
    assert net.edges == {}
    assert diags[0].tweet_id == "2"


def test_star_is_one_component():
    recs = [tweet(0, "src", 0)]
    for n, p in enumerate(["p1", "p2", "p3"]):
        recs.append(retweet(10 + n, p, 1, 0, "src", 0))
    net = build_rapid_retweet_network(stream(*recs), min_weight=1)
    comps = connected_components(net)
    assert len(comps) == 1 and comps[0].size == 4
    assert net.strength["src"] == 0


@pytest.mark.parametrize("window, min_weight", [(0, 2), (10, 0)])
def test_invalid_parameters(window, min_weight):
    with pytest.raises(ValueError):
        build_rapid_retweet_network(stream(), window, min_weight)


events = st.lists(
    st.tuples(st.sampled_from("abcd"), st.sampled_from("wxyz"), st.integers(0, 20)),
    max_size=40,
)


def _from_events(evs):
    recs = []
    for n, (promoter, promoted, lag) in enumerate(evs):
        recs.append(tweet(f"o{n}", promoted, 1000 * n))
        recs.append(retweet(f"r{n}", promoter, 1000 * n + lag, f"o{n}", promoted, 1000 * n))
    return stream(*recs)


@given(events, st.integers(1, 15), st.integers(1, 4))
@settings(max_examples=100, deadline=None)
def test_monotone_in_window_and_weight(evs, window, min_weight):
    s = _from_events(evs)
    base = build_rapid_retweet_network(s, window, min_weight)
    for stricter in (build_rapid_retweet_network(s, window, min_weight + 1),
                     build_rapid_retweet_network(s, max(1, window - 1), min_weight)):
        assert set(stricter.strength) <= set(base.strength)
        assert set(stricter.edges) <= set(base.edges)
        for k, e in stricter.edges.items():
            assert e.weight <= base.edges[k].weight


@given(events)
@settings(max_examples=100, deadline=None)
def test_evidence_recomputable(evs):
    s = _from_events(evs)
    net = build_rapid_retweet_network(s, 10, 1)
    index = s.by_id()
    for (promoter, promoted), edge in net.edges.items():
        assert edge.weight == len(edge.evidence)
        for ev in edge.evidence:
            rec = index[ev.tweet_id]
            assert rec.author_id == promoter and rec.retweeted_author_id == promoted
            assert ev.delta_t == rec.created_at - rec.retweeted_created_at < 10
    for node, strength in net.strength.items():
        assert strength == sum(e.weight for (u, _), e in net.edges.items() if u == node)
