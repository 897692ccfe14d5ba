import json

import pytest

from weighted_robin.mesh import parse_domain
from weighted_robin.verify import (CheckResult, ConfigError, SuiteConfig, VerificationReport, check_corollary,
                                   check_propositions, check_theorem_1, check_weinberger_chain,
                                   parse_config_text, run_suite, validate)
from weighted_robin.weights import gauss_profile, parse_profile


def test_checkresult_pass_rule():
    ok = CheckResult.make("x", {}, lhs=1.0, rhs=1.0 - 1e-7, tolerance=1e-6)
    assert ok.passed and ok.margin == pytest.approx(-1e-7)
    bad = CheckResult.make("x", {}, lhs=1.0, rhs=0.9, tolerance=1e-6)
    assert not bad.passed


def test_passed_recomputed_on_serialisation():
    c = CheckResult("x", {}, 0.0, 0.0, -1.0, 0.1, True)
    assert c.to_dict()["passed"] is False


def test_ellipse_margin_strict():
    p = parse_profile("linear:1")
    out = check_theorem_1(p, parse_domain("ellipse:1.5,0.8"), refinement=2, alpha_fractions=[0.0, 1.0])
    assert len(out) == 2
    for c in out:
        assert c.passed
        assert "strict" in c.notes.split(";")


def test_disk_flagged_equality_candidate():
    out = check_theorem_1(parse_profile("zero"), parse_domain("disk:1"), [0.0], refinement=3)
    assert out[0].passed
    assert "equality-candidate" in out[0].notes


def test_alpha_outside_interval_rejected():
    with pytest.raises(ValueError):
        check_theorem_1(parse_profile("zero"), parse_domain("disk:1"), [-5.0], refinement=2)


def test_steklov_rectangle_strict():
    c = check_corollary(parse_profile("quadratic:1"), parse_domain("rectangle:1.2,0.8"), 2)
    assert c.passed and c.margin > c.tolerance


def test_ball_facts_count_and_pass():
    out = check_propositions(parse_profile("quadlin:0.5,0.5"), 2, 1.0)
    # 1 Steklov bound + 11 alphas x 4 + 3 F checks
    assert len(out) == 1 + 44 + 3
    assert all(c.passed for c in out)


def test_chain():
    out = check_weinberger_chain(parse_profile("zero"), parse_domain("stadium:0.5,0.7"), -0.3, 2)
    ids = {c.check_id for c in out}
    assert {"rearrangement_g2", "rearrangement_F", "ball_ratio_identity", "symmetrization_decreasing",
            "trial_quotient_bound", "F_decreasing", "g_nondecreasing"} <= ids
    assert all(c.passed for c in out)


def test_config_parsing():
    cfg = parse_config_text("""
        # comment
        profiles = zero linear:2
        domains = disk:1
        alpha_fractions = 0 0.25
        refinement = 2
        suites = theorem
    """)
    assert cfg.profiles == ["zero", "linear:2"] and cfg.refinement == 2
    with pytest.raises(ConfigError):
        parse_config_text("bogus = 1")
    with pytest.raises(ConfigError):
        parse_config_text("refinement = two")


def test_invalid_profile_named():
    with pytest.raises(ConfigError, match="cubic:1"):
        validate(SuiteConfig(profiles=["zero", "cubic:1"]))
    with pytest.raises(ConfigError, match="gauss"):
        validate(SuiteConfig(profiles=["gauss:1"]))


def test_empty_domains_only_ball_checks():
    rep = run_suite(SuiteConfig(profiles=["zero"], domains=[], m_values=[2]))
    assert rep.checks
    assert {c.check_id for c in rep.checks} <= {
        "steklov_upper_bound", "g_increasing", "g_prime_dominates_alpha_g", "mu1_below_tau2",
        "lambda2_ball_nonnegative", "F_decreasing"}
    assert rep.ok


def test_exploratory_reported_not_asserted():
    rep = run_suite(SuiteConfig(profiles=[], exploratory=["gauss:1"], domains=["ellipse:1.5,0.8"],
                                alpha_fractions=[0.0], refinement=2, suites=["theorem"]))
    assert rep.checks and all(not c.asserted for c in rep.checks)
    assert rep.summary["exploratory"] == len(rep.checks)
    assert rep.ok


def test_report_serialisation():
    rep = VerificationReport("t", ["zero"], [], [0.0])
    rep.add(CheckResult.make("a", {"alpha": -0.5, "profile": "zero"}, 1.0, 2.0, 1e-6))
    rep.add(CheckResult.make("b", {"m": 2}, 2.0, 1.0, 1e-6))
    body = json.loads(rep.to_json())
    assert body["summary"] == {"total": 2, "passed": 1, "failed": 1, "asserted_failed": 1, "exploratory": 0}
    lines = rep.to_csv().splitlines()
    assert lines[0] == "check_id,alpha,m,profile,lhs,rhs,margin,tol,passed"
    assert lines[1] == "a,-0.5,,zero,1,2,1,1e-06,True"
    assert not rep.ok
