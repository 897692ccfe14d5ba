import pytest

from weighted_robin.cli import main


def test_ball(capsys, tmp_path):
    path = tmp_path / "g.csv"
    assert main(["ball", "--profile", "zero", "--m", "2", "--R", "1", "--alpha", "0", "--csv", str(path)]) == 0
    out = capsys.readouterr().out
    assert "lambda2   3.38995771667" in out
    assert "sigma1    1" in out
    assert open(path).readline().strip() == "r,g,g_prime,F"


@pytest.mark.parametrize("argv", [
    ["ball", "--alpha", "0"],
    ["ball", "--R", "1", "--profile", "cubic:1"],
    ["ball", "--R", "-1"],
    ["ball", "--R", "1", "--alpha", "0.5"],
    ["domain", "--kind", "perturbed_disk:1,0.1,3"],
    ["domain", "--kind", "hexagon:1"],
    ["verify", "--suite", "chain"],
    ["verify"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 2


def test_domain(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["domain", "--kind", "ellipse:1.5,0.8", "--refine", "1", "--alpha", "-0.2", "--out", str(out)]) == 0
    assert (out / "mesh.txt").exists() and (out / "spectrum.csv").exists()
    assert main(["domain", "--kind", "disk:1", "--refine", "2", "--steklov"]) == 0
    assert "sigma_1" in capsys.readouterr().out


def test_verify_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("profiles = linear:1\ndomains = rectangle:1.2,0.8\nalpha_fractions = 0.5\n"
                   "refinement = 2\nsuites = theorem corollary\n")
    out = tmp_path / "o"
    assert main(["verify", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    lines = (out / "report.csv").read_text().splitlines()
    assert lines[0].startswith("check_id,")
    assert len(lines) == 3
    assert (out / "report.json").exists()


def test_verify_failing_exit_code(tmp_path):
    cfg = tmp_path / "c.cfg"
    # with the error band switched off, discretisation bias on the disk (equality case) fails
    cfg.write_text("profiles = zero\ndomains = disk:1\nalpha_fractions = 0\nrefinement = 2\n"
                   "suites = theorem\ntol_floor = 0\nband_factor = 0\n")
    code = main(["verify", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"])
    assert code == 1
