"""Tests for the commutator-lab command line."""

import csv
import json
import tempfile
from pathlib import Path

import numpy as np
import pytest

from commutator_lab import __version__
from commutator_lab.cli import main
from commutator_lab.matcore import random_traceless
from commutator_lab.matrixio import parse_matrix, write_matrix


@pytest.fixture
def temp_dir():
    """Temporary working directory for input and output files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestUsage:
    """Tests for argument handling."""

    def test_no_command(self, capsys):
        """Without a subcommand the usage is printed and the code is 2."""
        code, _, err = run(capsys)
        assert code == 2
        assert "usage" in err

    def test_version(self, capsys):
        """--version prints the package version."""
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_unknown_suite(self):
        """Argument errors exit with code 2."""
        with pytest.raises(SystemExit) as info:
            main(["suite", "bogus"])
        assert info.value.code == 2


class TestFactor:
    """Tests for the factor subcommand."""

    def test_diag_example(self, capsys, temp_dir):
        """diag(1, -1) factors and the factors are written."""
        source = temp_dir / "a.json"
        source.write_text('{"n": 2, "data": [[1, 0], [0, 0], [0, 0], [-1, 0]]}')
        out_b, out_c = temp_dir / "b.json", temp_dir / "c.csv"
        code, out, _ = run(capsys, "factor", "--in", str(source), "--out-b", str(out_b), "--out-c", str(out_c))
        assert code == 0
        report = json.loads(out)
        assert report["pass"] is True
        assert report["method"] == "NormalShift"
        b, c = parse_matrix(out_b), parse_matrix(out_c)
        np.testing.assert_allclose(b @ c - c @ b, np.diag([1.0, -1.0]), atol=1e-14)

    def test_auto_picks_nilpotent(self, capsys, temp_dir):
        """A Jordan block goes down the nilpotent path."""
        source = temp_dir / "j.csv"
        write_matrix(np.eye(4, k=1), source)
        code, out, _ = run(capsys, "factor", "--in", str(source))
        assert code == 0
        assert json.loads(out)["method"] == "NilpotentRecurrence"

    def test_auto_falls_back_to_baseline(self, capsys, temp_dir):
        """A general traceless matrix uses the baseline."""
        source = temp_dir / "g.json"
        write_matrix(random_traceless(5, seed=3), source)
        report_path = temp_dir / "report.json"
        code, out, _ = run(capsys, "factor", "--in", str(source), "--report", str(report_path))
        assert code == 0
        assert out == ""
        assert json.loads(report_path.read_text())["method"] == "ShodaBaseline"

    def test_flag_method(self, capsys, temp_dir):
        """The flag path can be requested explicitly."""
        source = temp_dir / "j.json"
        write_matrix(np.eye(3, k=1), source)
        code, out, _ = run(capsys, "factor", "--method", "flag", "--in", str(source))
        assert code == 0
        assert json.loads(out)["pass"] is True

    def test_trace_rejected(self, capsys, temp_dir):
        """A matrix with trace is rejected with code 2."""
        source = temp_dir / "i.json"
        write_matrix(np.eye(2), source)
        code, _, err = run(capsys, "factor", "--in", str(source))
        assert code == 2
        assert "trace" in err

    def test_malformed_input(self, capsys, temp_dir):
        """Parse errors report their position and exit with code 2."""
        source = temp_dir / "bad.csv"
        source.write_text("1,0,0,0\n0,0,oops,0\n")
        code, _, err = run(capsys, "factor", "--in", str(source))
        assert code == 2
        assert "line 2, column 3" in err

    def test_wrong_method_is_rejected(self, capsys, temp_dir):
        """Forcing the normal path on a non-normal matrix exits with code 2."""
        source = temp_dir / "j.json"
        write_matrix(np.eye(3, k=1), source)
        code, _, err = run(capsys, "factor", "--method", "normal", "--in", str(source))
        assert code == 2
        assert "normality" in err


class TestOtherCommands:
    """Tests for the remaining subcommands."""

    def test_steinitz(self, capsys, temp_dir):
        """A zero-sum list is reordered with a certificate."""
        values = temp_dir / "v.json"
        values.write_text("[[1, 0], [1, 0], [-1, 0], [-1, 0]]")
        code, out, _ = run(capsys, "steinitz", "--values", str(values))
        assert code == 0
        document = json.loads(out)
        assert document["prefix_max"] == pytest.approx(1.0)
        assert len(document["ordered_values"]) == 4

    @pytest.mark.parametrize("seed", range(6))
    def test_steinitz_gaussian_values(self, capsys, temp_dir, seed):
        """Gaussian zero-sum tuples come back with a valid certificate."""
        rng = np.random.default_rng(seed)
        values = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        values -= values.mean()
        source = temp_dir / "v.json"
        source.write_text(json.dumps([[float(v.real), float(v.imag)] for v in values]))
        code, out, err = run(capsys, "steinitz", "--values", str(source))
        assert code == 0, err
        assert json.loads(out)["prefix_max"] <= 2 * float(np.max(np.abs(values))) + 1e-9

    def test_steinitz_nonzero_sum(self, capsys, temp_dir):
        """A list that does not sum to zero is refused."""
        values = temp_dir / "v.csv"
        values.write_text("1,0\n1,0\n")
        code, _, _ = run(capsys, "steinitz", "--values", str(values))
        assert code == 2

    def test_tucci_identity(self, capsys):
        """The identity holds at depth 5."""
        code, out, _ = run(capsys, "tucci", "identity", "--depth", "5")
        assert code == 0
        assert json.loads(out)["pass"] is True

    def test_tucci_certify(self, capsys):
        """The lower bound is certified."""
        code, out, _ = run(capsys, "tucci", "certify", "--depth", "4", "--r", "2")
        assert code == 0
        document = json.loads(out)
        assert document["lower"] <= document["norm_estimate"] + 1e-8

    def test_tucci_scan(self, capsys, temp_dir):
        """A scan writes one CSV row per depth."""
        target = temp_dir / "scan.csv"
        code, _, _ = run(capsys, "tucci", "scan", "--depths", "1-3", "--out", str(target))
        assert code == 0
        with open(target, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0][0] == "N"
        assert [row[0] for row in rows[1:]] == ["1", "2", "3"]

    def test_ergodic_demo(self, capsys):
        """A three-term element on eight points factors."""
        code, out, _ = run(capsys, "ergodic-demo", "--points", "8", "--terms", "1,2,3")
        assert code == 0
        assert json.loads(out)["method"] == "EigenfunctionCrossed"

    def test_ergodic_demo_without_eigenvalue(self, capsys):
        """Four points with powers 1..4 have no admissible eigenvalue."""
        code, _, err = run(capsys, "ergodic-demo", "--points", "4", "--terms", "1,2,3,4")
        assert code == 2
        assert "eigenvalue" in err

    def test_suite(self, capsys, temp_dir):
        """A suite run prints its summary and writes the bundle."""
        out = temp_dir / "suite"
        code, stdout, _ = run(capsys, "suite", "steinitz", "--cases", "2", "--max-dim", "4", "--out", str(out))
        assert code == 0
        assert stdout.startswith("# Suite `steinitz`")
        assert sorted(p.name for p in out.iterdir()) == ["header.json", "reports.jsonl", "summary.md"]
