"""测试命令行"""

import csv
import json
from pathlib import Path

import pytest
import yaml
from typer.testing import CliRunner

from germrenorm.cli import app
from germrenorm.core.exceptions import (
    EXIT_INPUT,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_PRECONDITION,
    EXIT_RESOURCE,
)

runner = CliRunner()

BANANA_2 = {"vertices": [1, 2], "edges": [[1, 2], [1, 2]]}
TRIANGLE = {"vertices": [1, 2, 3], "edges": [[1, 2], [2, 3], [1, 3]]}
EDGE = {"vertices": [1, 2], "edges": [[1, 2]]}


def _write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def _read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture
def workdir(tmp_path):
    """安静的配置与几个输入文件"""
    config = {"logger": {"level": "error", "rich": False}, "quadrature": {"t_level": 3}}
    _write_json(tmp_path / "config.json", config)
    _write_json(tmp_path / "banana.json", BANANA_2)
    _write_json(tmp_path / "triangle.json", TRIANGLE)
    _write_json(tmp_path / "edge.json", EDGE)
    _write_json(tmp_path / "geometry.json", {"type": "flat", "dim": 3, "mass": 0.0})
    testfn = [{"center": [0.0, 0.0, 0.0, 1.0, 0.0, 0.0], "width": 0.7}]
    _write_json(tmp_path / "testfn.json", testfn)
    return tmp_path


def _invoke(workdir: Path, *args: str):
    return runner.invoke(app, [*args, "--config", str(workdir / "config.json")])


class TestPoles:
    """poles 命令"""

    def test_banana(self, workdir):
        """测试 d=4 双边香蕉图的极点"""
        out = workdir / "poles.json"
        banana = str(workdir / "banana.json")
        result = _invoke(workdir, "poles", banana, "--dim", "4", "-o", str(out))
        assert result.exit_code == EXIT_OK, result.output
        document = _read_json(out)
        assert document["divergent_subgraphs"] == [[1, 2]]
        assert document["order_bound"] == 1

    def test_convergent_in_low_dimension(self, workdir):
        out = workdir / "poles.json"
        banana = str(workdir / "banana.json")
        result = _invoke(workdir, "poles", banana, "--dim", "1", "-o", str(out))
        assert result.exit_code == EXIT_OK, result.output
        assert _read_json(out)["divergent_subgraphs"] == []

    def test_missing_file(self, workdir):
        """测试输入文件不存在时退出码为 2"""
        result = _invoke(workdir, "poles", str(workdir / "missing.json"), "--dim", "4")
        assert result.exit_code == EXIT_INPUT

    def test_self_loop(self, workdir):
        graph = _write_json(workdir / "loop.json", {"vertices": [1], "edges": [[1, 1]]})
        result = _invoke(workdir, "poles", str(graph), "--dim", "4")
        assert result.exit_code == EXIT_INPUT

    def test_edge_cap(self, workdir):
        """测试超过边数上限时退出码为 4"""
        config = {"logger": {"level": "error", "rich": False}, "engine": {"edge_cap": 1}}
        _write_json(workdir / "config.json", config)
        result = _invoke(workdir, "poles", str(workdir / "banana.json"), "--dim", "4")
        assert result.exit_code == EXIT_RESOURCE


class TestTree:
    """tree 命令"""

    def test_triangle(self, workdir):
        """测试三角形的扇区树"""
        out = workdir / "tree.json"
        result = _invoke(
            workdir,
            "tree",
            str(workdir / "triangle.json"),
            "--lengths",
            "0.3,0.1,0.2",
            "-o",
            str(out),
        )
        assert result.exit_code == EXIT_OK, result.output
        document = _read_json(out)
        assert document["order"] == [2, 3, 1]
        assert document["tree"] == [2, 3]
        assert [c["edge"] for c in document["cycles"]] == [1]

    def test_tied_lengths(self, workdir):
        """测试长度相等时退出码为 3"""
        triangle = str(workdir / "triangle.json")
        result = _invoke(workdir, "tree", triangle, "--lengths", "0.1,0.1,0.2")
        assert result.exit_code == EXIT_PRECONDITION

    def test_malformed_lengths(self, workdir):
        result = _invoke(workdir, "tree", str(workdir / "triangle.json"), "--lengths", "a,b,c")
        assert result.exit_code == EXIT_INPUT

    def test_missing_lengths(self, workdir):
        """测试图文档不带长度"""
        result = _invoke(workdir, "tree", str(workdir / "triangle.json"))
        assert result.exit_code == EXIT_INPUT


class TestSectors:
    """sectors 命令"""

    def test_all_sectors(self, workdir):
        """测试列出全部 E! 个扇区"""
        out = workdir / "sectors.json"
        result = _invoke(
            workdir, "sectors", str(workdir / "triangle.json"), "--dim", "4", "-o", str(out)
        )
        assert result.exit_code == EXIT_OK, result.output
        assert len(_read_json(out)) == 6

    def test_one_sector(self, workdir):
        out = workdir / "sectors.json"
        result = _invoke(
            workdir,
            "sectors",
            str(workdir / "banana.json"),
            "--dim",
            "4",
            "--permutation",
            "2,1",
            "-o",
            str(out),
        )
        assert result.exit_code == EXIT_OK, result.output
        assert len(_read_json(out)) == 1

    def test_invalid_permutation(self, workdir):
        result = _invoke(
            workdir, "sectors", str(workdir / "banana.json"), "--permutation", "1,1"
        )
        assert result.exit_code == EXIT_INPUT


class TestGermAndSlice:
    """germ, renormalize 与 slice 命令"""

    def test_renormalize(self, workdir):
        """测试 d=3 单边图的重整化"""
        out = workdir / "renorm.json"
        result = _invoke(
            workdir,
            "renormalize",
            str(workdir / "edge.json"),
            str(workdir / "testfn.json"),
            str(workdir / "geometry.json"),
            "--order",
            "1",
            "-o",
            str(out),
        )
        assert result.exit_code == EXIT_OK, result.output
        document = _read_json(out)
        assert document["realized_poles"] == []
        assert document["value"][0] > 0

    def test_germ_then_slice(self, workdir):
        """测试把 germ 的输出沿直线求值为 CSV"""
        germ_file = workdir / "germ.json"
        result = _invoke(
            workdir,
            "germ",
            str(workdir / "edge.json"),
            str(workdir / "testfn.json"),
            str(workdir / "geometry.json"),
            "--order",
            "2",
            "-o",
            str(germ_file),
        )
        assert result.exit_code == EXIT_OK, result.output

        csv_file = workdir / "slice.csv"
        result = runner.invoke(
            app,
            [
                "slice",
                str(germ_file),
                "--origin",
                "0",
                "--direction",
                "1",
                "--start",
                "-0.1",
                "--stop",
                "0.1",
                "--steps",
                "3",
                "-o",
                str(csv_file),
            ],
        )
        assert result.exit_code == EXIT_OK, result.output
        with open(csv_file, encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert [float(r["t"]) for r in rows] == pytest.approx([-0.1, 0.0, 0.1])
        assert all(float(r["re"]) > 0 for r in rows)

    @pytest.mark.parametrize("chi_method", ["analytic", "monte-carlo"])
    def test_germ_is_deterministic(self, workdir, chi_method):
        """测试相同输入与种子时两次输出逐字节相同"""
        outputs = []
        for run in range(2):
            out = workdir / f"germ-{run}.json"
            result = _invoke(
                workdir,
                "germ",
                str(workdir / "edge.json"),
                str(workdir / "testfn.json"),
                str(workdir / "geometry.json"),
                "--labelled",
                "--order",
                "1",
                "--chi-method",
                chi_method,
                "--mc-samples",
                "2000",
                "--seed",
                "7",
                "-o",
                str(out),
            )
            assert result.exit_code == EXIT_OK, result.output
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_slice_bad_germ(self, workdir):
        """测试非对象的芽文件"""
        bad = _write_json(workdir / "bad.json", [1, 2])
        result = runner.invoke(app, ["slice", str(bad), "--origin", "0", "--direction", "1"])
        assert result.exit_code == EXIT_INPUT

    def test_divergent_tail(self, workdir):
        """测试 d=2 无质量时尾部发散, 退出码为 3"""
        _write_json(workdir / "plane.json", {"dim": 2})
        testfn = _write_json(workdir / "plane_fn.json", [{"width": 0.7}])
        result = _invoke(
            workdir,
            "germ",
            str(workdir / "banana.json"),
            str(testfn),
            str(workdir / "plane.json"),
        )
        assert result.exit_code == EXIT_PRECONDITION


class TestVerify:
    """verify 命令"""

    @staticmethod
    def _corpus(workdir: Path, tolerance: float) -> Path:
        entry = {
            "kind": "translation",
            "graph": EDGE,
            "geometry": {"dim": 3},
            "testfn": [{"center": [0.1, 0.0, 0.0, -0.2, 0.3, 0.0], "width": 0.8}],
            "shift": [0.0, 1.0, 0.0],
            "tolerance": tolerance,
        }
        corpus = workdir / "corpus"
        corpus.mkdir(exist_ok=True)
        (corpus / "corpus.yaml").write_text(yaml.safe_dump({"checks": [entry]}), encoding="utf-8")
        return corpus

    def test_passing_corpus(self, workdir):
        """测试全部通过时退出码为 0"""
        out = workdir / "verify.json"
        result = _invoke(workdir, "verify", str(self._corpus(workdir, 1e-4)), "-o", str(out))
        assert result.exit_code == EXIT_OK, result.output
        document = _read_json(out)
        assert document["passed"] is True
        assert [c["name"] for c in document["checks"]] == ["translation"]

    def test_failing_corpus(self, workdir):
        """测试有检查失败时退出码为 5"""
        out = workdir / "verify.json"
        result = _invoke(workdir, "verify", str(self._corpus(workdir, -1.0)), "-o", str(out))
        assert result.exit_code == EXIT_NUMERICAL
        assert _read_json(out)["passed"] is False

    def test_shared_quadrature_flags(self, workdir):
        """测试 verify 接受共享的求积参数"""
        corpus = str(self._corpus(workdir, 1e-4))
        flags = ["--quad-nodes", "12", "--mc-samples", "500", "--seed", "3"]
        result = _invoke(workdir, "verify", corpus, *flags, "--chi-method", "analytic")
        assert result.exit_code == EXIT_OK, result.output

        # 蒙特卡罗必须给出种子
        result = _invoke(workdir, "verify", corpus, "--chi-method", "monte-carlo")
        assert result.exit_code == EXIT_INPUT

    def test_missing_corpus(self, workdir):
        result = _invoke(workdir, "verify", str(workdir / "nowhere"))
        assert result.exit_code == EXIT_INPUT


def test_invalid_config(workdir):
    """测试非法配置值退出码为 2"""
    _write_json(workdir / "config.json", {"quadrature": {"t_level": 0}})
    result = _invoke(workdir, "poles", str(workdir / "banana.json"), "--dim", "4")
    assert result.exit_code == EXIT_INPUT
