import itertools

import pytest

from coordnet.ingest import Kind, serialize_lines
from coordnet.network import connected_components
from coordnet.retweet_net import build_rapid_retweet_network
from coordnet.similar_net import build_similar_tweet_network, find_similar_pairs
from coordnet.stats import interval_distribution
from coordnet.synth import (
    CampaignConfig, ConfigError, GroundTruth, GroupInfo, GroupKind, GroupSpec, evaluate, generate, load_config,
)
from coordnet.textsim import ratcliff_obershelp


def group_tweets(s, truth, gid):
    members = set(truth.groups[gid].members)
    return [r for r in s if r.author_id in members]


def test_zero_mutation_copypasta_pairs():
    cfg = CampaignConfig(seed=1, background_rate=0, planted_groups=[GroupSpec("copypasta", 5, bursts=2)])
    s, truth = generate(cfg)
    tweets = group_tweets(s, truth, "g0")
    assert len(tweets) == 10
    bursts = [tweets[:5], tweets[5:]]
    for burst in bursts:
        assert len({r.author_id for r in burst}) == 5
        pairs = list(itertools.combinations(burst, 2))
        assert len(pairs) == 10
        for a, b in pairs:
            assert ratcliff_obershelp(a.text, b.text) == 1.0
            assert abs(a.created_at - b.created_at) < 10
    assert len(find_similar_pairs(s)) == 20


def test_deterministic_under_seed():
    cfg = CampaignConfig(seed=11, planted_groups=[GroupSpec("news_factory", 4), GroupSpec("copypasta", 3, mutation_rate=0.05)])
    a = "".join(serialize_lines(generate(cfg)[0]))
    b = "".join(serialize_lines(generate(cfg)[0]))
    assert a == b
    c = "".join(serialize_lines(generate(CampaignConfig(seed=12, planted_groups=cfg.planted_groups))[0]))
    assert a != c


def test_organic_share_never_pairs():
    cfg = CampaignConfig(seed=2, planted_groups=[GroupSpec("organic_share", 8, latency=(60, 600))])
    s, truth = generate(cfg)
    tweets = group_tweets(s, truth, "g0")
    assert len(tweets) == 8 and len({r.text for r in tweets}) == 1
    gaps = [b.created_at - a.created_at for a, b in zip(tweets, tweets[1:])]
    assert min(gaps) >= 60
    assert find_similar_pairs(s) == []
    assert truth.groups["g0"].detectable is False


def test_background_is_dissimilar():
    cfg = CampaignConfig(seed=4, duration=3600, background_rate=2.0)
    s, _ = generate(cfg)
    # only spaces can match, and they are at most a third of any text
    assert find_similar_pairs(s, sim_threshold=1 / 3, time_window=60) == []
    assert all(h.total == 0 for h in interval_distribution(s, 1 / 3).values())


def test_background_retweets_are_slow():
    s, _ = generate(CampaignConfig(seed=5, background_retweet_fraction=0.5))
    rts = [r for r in s if r.kind is Kind.RETWEET]
    assert rts
    assert min(r.created_at - r.retweeted_created_at for r in rts) >= 60
    assert all(r.author_id != r.retweeted_author_id for r in rts)
    assert build_rapid_retweet_network(s, min_weight=1).edges == {}


def test_retweet_ring_shape():
    cfg = CampaignConfig(seed=6, background_rate=0, planted_groups=[GroupSpec("retweet_ring", 4, bursts=3)])
    s, truth = generate(cfg)
    net = build_rapid_retweet_network(s)
    (comp,) = connected_components(net, s)
    assert set(comp.members) == set(truth.groups["g0"].members)
    assert sorted(e.weight for e in net.edges.values()) == [3, 3, 3]


def test_news_factory_domains():
    cfg = CampaignConfig(seed=8, background_rate=0.1, planted_groups=[GroupSpec("news_factory", 6, bursts=2)])
    s, truth = generate(cfg)
    comps = connected_components(build_similar_tweet_network(find_similar_pairs(s)), s)
    assert [set(c.members) for c in comps] == [set(truth.groups["g0"].members)]
    assert comps[0].domain_count == 6


def test_mutation_lowers_scores_but_stays_detectable():
    cfg = CampaignConfig(seed=9, background_rate=0, planted_groups=[GroupSpec("copypasta", 6, mutation_rate=0.05)])
    s, truth = generate(cfg)
    assert truth.groups["g0"].detectable
    pairs = find_similar_pairs(s)
    assert pairs and any(p.score < 1.0 for p in pairs)


def test_ground_truth_covers_each_account_once(tmp_path):
    cfg = CampaignConfig(seed=10, background_accounts=30, planted_groups=[
        GroupSpec("copypasta", 3), GroupSpec("retweet_ring", 3)])
    _, truth = generate(cfg)
    planted = [m for g in truth.groups.values() for m in g.members]
    assert len(planted) == len(set(planted)) == 6
    assert len(truth.membership) == 36
    path = tmp_path / "truth.jsonl"
    truth.write(path)
    assert GroundTruth.read(path) == truth


@pytest.mark.parametrize(
    "spec",
    [
        GroupSpec("copypasta", 4, mutation_rate=0.5, detectable=True),
        GroupSpec("copypasta", 4, latency=(0, 30), detectable=True),
        GroupSpec("retweet_ring", 4, bursts=1, detectable=True),
        GroupSpec("organic_share", 4, latency=(60, 90), detectable=True),
        GroupSpec("organic_share", 4, latency=(10, 90)),
        GroupSpec("copypasta", 1),
    ],
)
def test_infeasible_configs_rejected(spec):
    with pytest.raises(ConfigError):
        generate(CampaignConfig(planted_groups=[spec]))


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError):
        GroupSpec("flashmob", 3)


def test_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"seed": 3, "planted_groups": [{"kind": "CopypastaGroup", "size": 3, "latency": [0, 5]}]}')
    cfg = load_config(path)
    assert cfg.planted_groups[0].kind is GroupKind.COPYPASTA
    assert CampaignConfig.from_dict(cfg.to_dict()) == cfg
    path.write_text('{"seed": 3, "colour": "red"}')
    with pytest.raises(ConfigError):
        load_config(path)


def _truth(groups):
    membership = {}
    infos = {}
    for gid, members in groups.items():
        infos[gid] = GroupInfo(gid, GroupKind.COPYPASTA, tuple(members), True)
        membership.update({m: gid for m in members})
    membership.update({"bg1": None, "bg2": None})
    return GroundTruth(membership, infos)


def test_evaluate_exact():
    truth = _truth({"g0": ["a", "b", "c"], "g1": ["d", "e"]})
    ev = evaluate([("a", "b", "c"), ("d", "e")], truth)
    assert (ev.precision, ev.recall) == (1.0, 1.0)
    assert ev.groups == {"g0": "recovered", "g1": "recovered"}


def test_evaluate_nothing_detected():
    ev = evaluate([], _truth({"g0": ["a", "b"]}))
    assert ev.recall == 0.0 and ev.precision == 1.0 and ev.no_detected_pairs
    assert ev.groups == {"g0": "missed"}


def test_evaluate_split_group():
    # planted pairs ab ac ad bc bd cd; detected {a,b} {c,d} co-detect ab and cd
    ev = evaluate([("a", "b"), ("c", "d")], _truth({"g0": ["a", "b", "c", "d"]}))
    assert ev.recall == 2 / 6 and ev.precision == 1.0
    assert ev.groups == {"g0": "split"}


def test_evaluate_merged_group():
    # detected pairs: C(4,2)=6, of which only ab is planted
    ev = evaluate([("a", "b", "bg1", "bg2")], _truth({"g0": ["a", "b"]}))
    assert ev.precision == 1 / 6 and ev.recall == 1.0
    assert ev.groups == {"g0": "merged"}


def test_evaluate_kind_filter():
    truth = _truth({"g0": ["a", "b"]})
    truth.groups["g1"] = GroupInfo("g1", GroupKind.RETWEET_RING, ("x", "y"), True)
    truth.membership.update(x="g1", y="g1")
    ev = evaluate([("a", "b")], truth, kinds=["copypasta"])
    assert ev.true_pairs == 1 and ev.recall == 1.0 and list(ev.groups) == ["g0"]
