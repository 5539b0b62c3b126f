import json
import shutil
import subprocess
import sys

import pytest

from wavebilinear.cli import resolve_configs, run
from wavebilinear.harness.config import ConfigError


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


class TestExitCodes:
    def test_unknown_subcommand(self, capsys):
        assert run(["frobnicate"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_help(self, capsys):
        assert run(["--help"]) == 0

    def test_mu_above_lam(self, tmp_path, capsys):
        cfg = write(tmp_path, {"dim": 2, "grid": 64, "pairs": [[32, 16]]})
        assert run(["wbes", "--config", str(cfg), "--output", str(tmp_path / "o.csv")]) == 2
        err = capsys.readouterr().err
        assert "mu=32" in err and "lam=16" in err
        assert not (tmp_path / "o.csv").exists()

    def test_bad_override(self, tmp_path):
        assert run(["ges", "--set", "nonsense", "--output", str(tmp_path / "o.csv")]) == 2
        assert run(["ges", "--set", "bogus=1", "--output", str(tmp_path / "o.csv")]) == 2
        assert run(["ges", "--seed-list", "a,b", "--output", str(tmp_path / "o.csv")]) == 2

    def test_missing_config(self, tmp_path):
        assert run(["ges", "--config", str(tmp_path / "nope.json")]) == 2

    def test_passing_run(self, tmp_path, capsys):
        cfg = write(tmp_path, {"grid": 32, "pairs": [[4, 8]], "seeds": [0]})
        out = tmp_path / "ges.csv"
        assert run(["ges", "--config", str(cfg), "--output", str(out)]) == 0
        text = out.read_text().splitlines()
        assert text[0] == "n,N,L,nullform,mu,lam,seed,lhs,rhs,ratio" and len(text) == 2
        assert "ges: PASS" in capsys.readouterr().out

    def test_failing_run_still_writes(self, tmp_path):
        # a single mu cannot support a slope fit, so the slope check fails
        out = tmp_path / "w.json"
        code = run(["wbes", "--grid", "32", "--set", "lam_list=[8]", "--set", "mu_list=[8]", "--seed-list", "0",
                    "--set", "nullforms=[\"Q0\"]", "--format", "json", "--output", str(out)])
        assert code == 1
        doc = json.loads(out.read_text())
        assert doc["summary"]["passed"] is False and len(doc["records"]) == 1

    def test_unwritable_output(self, tmp_path, capsys):
        blocker = tmp_path / "f"
        blocker.write_text("")
        cfg = write(tmp_path, {"grid": 32, "pairs": [[4, 8]], "seeds": [0]})
        assert run(["ges", "--config", str(cfg), "--output", str(blocker / "o.csv")]) == 2
        assert str(blocker) in capsys.readouterr().err


class TestResolve:
    def test_layering(self, tmp_path):
        cfg = write(tmp_path, {"grid": 128, "seeds": [1, 2]})
        (c,) = resolve_configs("ges", cfg, {"seeds": [7]})
        assert c.grid == 128 and c.seeds == (7,) and c.pairs == ((4.0, 8.0), (8.0, 16.0))

    def test_dim_selects_corollary_config(self):
        (c,) = resolve_configs("corollary", None, {"dim": 3})
        assert c.dim == 3 and c.nullforms == ("Q12",)
        assert len(resolve_configs("corollary", None, {})) == 2

    def test_invalid(self):
        with pytest.raises(ConfigError):
            resolve_configs("wbes", None, {"grid": 30})


@pytest.mark.skipif(shutil.which("wavebilinear") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = tmp_path / "d.csv"
    p = subprocess.run(["wavebilinear", "divcurl", "--set", "draws=2", "--output", str(out)],
                       capture_output=True, text=True)
    assert p.returncode == 0, p.stderr
    assert out.exists()


def test_module_entry(tmp_path):
    p = subprocess.run([sys.executable, "-m", "wavebilinear.cli", "nope"], capture_output=True, text=True)
    assert p.returncode == 2
