import json
from fractions import Fraction

import pytest

from almostpartite.campaign import (
    CampaignConfig,
    ResultRecord,
    convergence_report,
    format_report,
    records_to_csv,
    records_to_json,
    run_campaign,
)
from almostpartite.census import enumerate_class, pld_predicate
from almostpartite.errors import ConfigError
from almostpartite.logic import compile_formula, parse_sentence

DOMINATING = "exists x. forall y. (E(x,y) | x = y)"


def rec(n, est, se=0.0, exp="xi-recovery"):
    return ResultRecord(exp, n, 10, est, se, est, est, 0, "0")


@pytest.mark.parametrize(
    "changes",
    [
        {"replicas": 0},
        {"n_grid": []},
        {"n_grid": [8, 4]},
        {"experiment": "nope"},
        {"experiment": "sentence-probability"},
        {"experiment": "sentence-probability", "sentence": "E(x,y)"},
        {"experiment": "poisson-fit", "d": 2, "eps": 3.0},
        {"experiment": "forb-census"},
        {"exact": True, "n_grid": [9]},
        {"workers": 0},
    ],
)
def test_validation(changes):
    cfg = CampaignConfig(**{"experiment": "xi-recovery", "n_grid": [4], **changes})
    with pytest.raises(ConfigError):
        cfg.validate()


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict({"experiment": "xi-recovery", "n_grid": [4], "colour": 1})


def test_exact_sentence_probability_matches_enumeration():
    cfg = CampaignConfig("sentence-probability", [4], l=2, d=1, sentence=DOMINATING, exact=True)
    (r,) = run_campaign(cfg)
    members = list(enumerate_class(4, pld_predicate(2, 1)))
    f = compile_formula(parse_sentence(DOMINATING))
    expected = Fraction(sum(1 for g in members if f(g)), len(members))
    assert r.exact == f"{expected.numerator}/{expected.denominator}"
    assert r.estimate == float(expected)


@pytest.mark.parametrize("experiment", ["xi-recovery", "unique-decomposition", "sentence-probability"])
def test_sampling_agrees_with_exact(experiment):
    base = dict(experiment=experiment, n_grid=[5], l=2, d=1, sentence=DOMINATING, seed=11)
    (exact,) = run_campaign(CampaignConfig(**base, exact=True))
    (sampled,) = run_campaign(CampaignConfig(**base, replicas=1500))
    se = max(sampled.stderr, (exact.estimate * (1 - exact.estimate) / 1500) ** 0.5, 1e-3)
    assert abs(sampled.estimate - exact.estimate) < 4 * se


def test_forb_census_exact_and_sampled():
    base = dict(experiment="forb-census", n_grid=[5], pattern=[1, 1], seed=2)
    (exact,) = run_campaign(CampaignConfig(**base, exact=True))
    # 388 triangle-free graphs on 5 labelled vertices; only the 12 five-cycles are not bipartite
    assert exact.exact == str(Fraction(388 - 12, 388))
    (sampled,) = run_campaign(CampaignConfig(**base, replicas=600))
    assert abs(sampled.estimate - exact.estimate) < 4 * max(sampled.stderr, 0.01)


def test_ef_and_poisson_run():
    (r,) = run_campaign(CampaignConfig("ef-classes", [4], k=2, l=2, d=1, exact=True))
    assert 0 < r.estimate <= 1 and int(r.extra["classes"]) >= 2
    (r,) = run_campaign(CampaignConfig("poisson-fit", [12], l=1, d=2, eps=1.0, replicas=50))
    assert 0 <= r.estimate <= 1 and 0 <= float(r.extra["window_fraction"]) <= 1


def test_determinism_across_workers(tmp_path):
    out = []
    for workers in (1, 2, 1):
        path = tmp_path / f"run{len(out)}.csv"
        cfg = CampaignConfig("xi-recovery", [16, 24], replicas=30, seed=9, workers=workers, out_csv=str(path))
        run_campaign(cfg)
        out.append(path.read_bytes())
    assert out[0] == out[1] == out[2]


def test_outputs_exclude_timing_by_default():
    r = rec(4, 0.5)
    r.wall_time = 1.25
    assert "wall_time" not in records_to_csv([r])
    assert "wall_time" in records_to_csv([r], include_timing=True)
    body = json.loads(records_to_json([r]))
    assert "wall_time" not in body["records"][0]


def test_report_examples():
    (row,) = convergence_report([rec(8, 0.3)])
    assert row["diff"] is None
    rows = convergence_report([rec(8, 0.5), rec(4, 0.5), rec(16, 0.5)])
    assert [r["n"] for r in rows] == [4, 8, 16]
    assert [r["diff"] for r in rows[1:]] == [0.0, 0.0]
    with pytest.raises(ValueError):
        convergence_report([rec(4, 0.1), rec(8, 0.1, exp="ef-classes")])
    assert len(format_report(rows).splitlines()) == 4
