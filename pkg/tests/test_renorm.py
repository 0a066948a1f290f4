"""测试重整化映射与函数方程检查"""

from itertools import combinations
from pathlib import Path

import numpy as np
import pytest
import yaml

from germrenorm.config import QuadratureConfig
from germrenorm.continuation.oracle import direct_pairing
from germrenorm.core.exceptions import InputError
from germrenorm.geometry.flat import FlatGeometry
from germrenorm.geometry.testfn import TestFunction
from germrenorm.germs.forms import LinearForm
from germrenorm.graphs.model import FeynmanGraph, LabelledGraph
from germrenorm.renorm import (
    check_compatibility,
    check_extension,
    check_factorization,
    check_linearity,
    check_locality,
    check_translation_covariance,
    load_corpus,
    relative_discrepancy,
    renormalize,
    renormalize_combination,
    support_separation,
    verify_corpus,
)
from germrenorm.schemas import parse_testfn

EDGE = FeynmanGraph((1, 2), ((1, 2),))
BANANA_2 = FeynmanGraph((1, 2), ((1, 2), (1, 2)))
PATH = FeynmanGraph((1, 2, 3), ((1, 2), (2, 3)))
SPACE = FlatGeometry(3)
SPACETIME = FlatGeometry(4)
CORPUS = Path(__file__).parent.parent / "corpus"


@pytest.fixture
def separated():
    """两个相距 6 个宽度的高斯"""
    return TestFunction.gaussian(2, 3, center=(0.0, 0.0, 0.0, 3.0, 0.0, 0.0), width=0.5)


@pytest.fixture
def overlapping():
    return TestFunction.gaussian(
        2, 3, center=(0.1, 0.0, 0.0, -0.2, 0.3, 0.0), width=0.8, poly={(1, 0, 0, 0, 0, 0): 1.0}
    )


class TestRenormalize:
    """投影重整化 R = ev ∘ π"""

    def test_convergent_edge_matches_pairing(self, separated):
        """测试收敛图的重整化值等于直接配对"""
        result = renormalize(EDGE, separated, SPACE)
        assert result.amplitude.realized == ()
        direct = direct_pairing(EDGE, separated, SPACE)
        assert relative_discrepancy(result.value, direct) <= 1e-4
        assert abs(result.value.imag) <= 1e-12 * abs(result.value)

    def test_document(self, separated):
        """测试结果的文档形式"""
        document = renormalize(EDGE, separated, SPACE, order=1).to_document()
        assert set(document) == {
            "value",
            "quad_error",
            "heat_order",
            "realized_poles",
            "holo",
            "germ",
        }
        assert document["heat_order"] == 0
        assert document["realized_poles"] == []

    def test_labelled_graph_accepted(self, separated):
        """测试带标号图只取其底图"""
        plain = renormalize(EDGE, separated, SPACE, order=1).value
        labelled = renormalize(LabelledGraph(EDGE, (1,)), separated, SPACE, order=1).value
        assert labelled == pytest.approx(plain, rel=1e-12)

    def test_divergent_banana(self):
        """测试 d=4 香蕉图的极点被投影掉"""
        fn = TestFunction.gaussian(2, 4, width=1.0)
        result = renormalize(BANANA_2, fn, FlatGeometry(4), order=1)
        assert result.amplitude.realized == (LinearForm.parse([1, 1]),)
        assert np.isfinite(result.value.real)
        assert result.holo_jet.order == 1

    def test_combination(self, overlapping):
        """测试图的线性组合"""
        single = renormalize(EDGE, overlapping, SPACE, order=1).value
        terms = [(2.0, EDGE), (-0.5, EDGE)]
        combined = renormalize_combination(terms, overlapping, SPACE, order=1)
        assert combined.value == pytest.approx(1.5 * single, rel=1e-12)
        assert [c for c, _ in combined.parts] == [2.0, -0.5]
        assert combined.to_document()["parts"][0]["coefficient"] == 2.0
        with pytest.raises(InputError, match="empty"):
            renormalize_combination([], overlapping, SPACE)


class TestChecks:
    """函数方程检查"""

    def test_relative_discrepancy(self):
        """测试相对差异"""
        assert relative_discrepancy(0.0, 0.0) == 0.0
        assert relative_discrepancy(1.0, 1.0) == 0.0
        assert relative_discrepancy(1.0, 1.1) == pytest.approx(0.1 / 1.1)
        assert relative_discrepancy(1j, -1j) == pytest.approx(2.0)

    def test_support_separation(self):
        """测试以宽度为单位的中心距离"""
        fn = TestFunction.gaussian(2, 2, center=(0.0, 0.0, 3.0, 4.0), width=0.5)
        assert support_separation(fn, [(0, 1)]) == pytest.approx(10.0)
        assert support_separation(fn, []) == np.inf

    def test_extension(self, separated):
        """测试延拓性"""
        report = check_extension(EDGE, separated, SPACE)
        assert report.passed, report.details
        assert report.details["separation"] == pytest.approx(6.0)

    def test_linearity(self, separated, overlapping):
        """测试线性"""
        report = check_linearity(EDGE, separated, overlapping, 2.0, -1.0, SPACE)
        assert report.passed, report.details
        assert report.details["a"] == 2.0

    def test_translation(self, overlapping):
        """测试平移协变"""
        report = check_translation_covariance(EDGE, overlapping, [0.5, -0.25, 1.0], SPACE)
        assert report.passed, report.details
        assert report.name == "translation"

    def test_compatibility(self, overlapping):
        """测试重命名顶点, 反转边序与嵌入多余顶点"""
        report = check_compatibility(EDGE, overlapping, SPACE, tolerance=1e-8)
        assert report.passed, report.details
        assert set(report.details) == {"value", "relabelled", "reversed_edges", "embedded"}

    def test_factorization(self, overlapping):
        """测试不交并的乘法性"""
        report = check_factorization(EDGE, EDGE, overlapping, overlapping, SPACE, tolerance=1e-3)
        assert report.name == "factorization"
        assert report.passed, report.details
        assert report.details["crossing"] == []

    def test_banana_extension(self):
        """测试 d=4 双边香蕉图在远离对角线时的延拓性"""
        fn = TestFunction.gaussian(
            2, 4, center=(0.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0), width=0.2
        )
        report = check_extension(BANANA_2, fn, SPACETIME)
        assert report.details["separation"] == pytest.approx(15.0)
        assert report.passed, report.details

    def test_banana_translation(self):
        """测试 d=4 双边香蕉图的平移协变"""
        fn = TestFunction.gaussian(
            2, 4, center=(0.2, 0.0, 0.0, 0.0, -0.1, 0.3, 0.0, 0.0), width=0.9
        )
        report = check_translation_covariance(BANANA_2, fn, [1.0, 0.0, 0.0, 0.0], SPACETIME)
        assert report.passed, report.details
        assert report.details["shift"] == [1.0, 0.0, 0.0, 0.0]

    @pytest.mark.slow
    def test_banana_factorization(self):
        """测试两个不交的 d=4 双边香蕉图的乘法性"""
        fn = TestFunction.gaussian(2, 4, width=1.0)
        other = TestFunction.gaussian(
            2, 4, center=(0.2, 0.0, 0.0, 0.0, -0.1, 0.3, 0.0, 0.0), width=0.9
        )
        quadcfg = QuadratureConfig(t_level=2, max_tensor_points=2_000_000)
        report = check_factorization(
            BANANA_2, BANANA_2, fn, other, SPACETIME, tolerance=1e-3, quadcfg=quadcfg
        )
        assert report.details["crossing"] == []
        assert report.passed, report.details

    @pytest.mark.slow
    def test_locality_with_crossing_edge(self):
        """测试有跨越边时的局部性"""
        fn_u = TestFunction.gaussian(1, 3, center=(0.0, 0.0, 0.0), width=0.4)
        fn_v = TestFunction.gaussian(2, 3, center=(3.0, 0.0, 0.0, 3.2, 0.1, 0.0), width=0.4)
        report = check_locality(PATH, [1], fn_u, fn_v, SPACE)
        assert report.details["crossing"] == [1]
        assert report.passed, report.details

    def test_locality_checks(self):
        """测试局部性检查的参数"""
        fn = TestFunction.gaussian(1, 3)
        with pytest.raises(InputError, match="both sides"):
            check_locality(PATH, [1, 2, 3], fn, fn, SPACE)
        with pytest.raises(InputError, match="test functions on"):
            check_locality(PATH, [1], fn, fn, SPACE)


class TestCorpus:
    """检查语料的加载与运行"""

    @staticmethod
    def _write(path, data):
        path.write_text(yaml.safe_dump(data), encoding="utf-8")
        return path

    @pytest.fixture
    def corpus_dir(self, tmp_path):
        graph = {"vertices": [1, 2], "edges": [[1, 2]]}
        testfn = [{"center": [0.1, 0.0, 0.0, -0.2, 0.3, 0.0], "width": 0.8}]
        other = [{"center": [0.0, 0.0, 0.0, 0.5, 0.0, 0.0], "width": 0.6}]
        checks = [
            {
                "kind": "linearity",
                "name": "edge",
                "graph": graph,
                "geometry": {"dim": 3},
                "testfn": testfn,
                "other": other,
                "a": 3.0,
                "b": 0.5,
            },
            {
                "kind": "translation",
                "graph": graph,
                "geometry": {"dim": 3},
                "testfn": testfn,
                "shift": [0.0, 1.0, 0.0],
            },
        ]
        self._write(tmp_path / "corpus.yaml", {"checks": checks})
        return tmp_path

    def test_load_from_directory_or_file(self, corpus_dir):
        """测试从目录或文件加载"""
        assert len(load_corpus(corpus_dir)) == 2
        assert load_corpus(corpus_dir / "corpus.yaml")[1]["kind"] == "translation"

    def test_load_errors(self, tmp_path):
        """测试缺失文件, 非法 YAML 与缺少 checks 列表"""
        with pytest.raises(InputError, match="not found"):
            load_corpus(tmp_path)
        (tmp_path / "corpus.yaml").write_text("checks: [unclosed", encoding="utf-8")
        with pytest.raises(InputError, match="not valid YAML"):
            load_corpus(tmp_path)
        self._write(tmp_path / "corpus.yaml", {"checks": 3})
        with pytest.raises(InputError, match="no list of checks"):
            load_corpus(tmp_path)

    def test_verify(self, corpus_dir):
        """测试运行整个语料并按种类过滤"""
        reports = verify_corpus(corpus_dir)
        assert [r.name for r in reports] == ["linearity: edge", "translation"]
        assert all(r.passed for r in reports)
        only = verify_corpus(corpus_dir, only=["translation"])
        assert [r.name for r in only] == ["translation"]

    def test_unknown_kind(self, tmp_path):
        """测试未知的检查种类"""
        entry = {"kind": "unitarity", "graph": {"vertices": [1]}, "geometry": {"dim": 3}}
        self._write(tmp_path / "corpus.yaml", {"checks": [entry]})
        with pytest.raises(InputError, match="unknown check kind"):
            verify_corpus(tmp_path)

    def test_invalid_entry(self, tmp_path):
        """测试非法的图文档"""
        graph = {"vertices": [1], "extra": 1}
        entry = {"kind": "extension", "graph": graph, "geometry": {"dim": 3}}
        self._write(tmp_path / "corpus.yaml", {"checks": [entry]})
        with pytest.raises(InputError, match="invalid graph document"):
            verify_corpus(tmp_path)

    def test_entry_overrides(self, tmp_path):
        """测试条目内的 quadrature 与 engine 覆盖"""
        entry = {
            "kind": "translation",
            "graph": {"vertices": [1, 2], "edges": [[1, 2]]},
            "geometry": {"dim": 3},
            "testfn": [{"center": [0.1, 0.0, 0.0, -0.2, 0.3, 0.0], "width": 0.8}],
            "quadrature": {"t_level": 4},
            "engine": {"order": 1, "tolerance": 1e-6},
        }
        self._write(tmp_path / "corpus.yaml", {"checks": [entry]})
        (report,) = verify_corpus(tmp_path)
        assert report.tolerance == 1e-6
        assert report.passed, report.details

        entry["quadrature"] = {"t_level": 0}
        self._write(tmp_path / "corpus.yaml", {"checks": [entry]})
        with pytest.raises(InputError, match="invalid quadrature document"):
            verify_corpus(tmp_path)

        entry["quadrature"] = [3]
        self._write(tmp_path / "corpus.yaml", {"checks": [entry]})
        with pytest.raises(InputError, match="must be a mapping"):
            verify_corpus(tmp_path)

    def test_shipped_corpus(self):
        """测试仓库自带的语料覆盖所有检查种类"""
        kinds = {entry["kind"] for entry in load_corpus(CORPUS)}
        assert kinds == {
            "extension",
            "translation",
            "compatibility",
            "linearity",
            "factorization",
            "locality",
        }

    def test_shipped_extension_entries(self):
        """测试延拓性条目: 至少 5 个图, 每个图至少 3 个支撑分离的测试函数"""
        per_graph = {}
        for entry in load_corpus(CORPUS):
            if entry["kind"] != "extension":
                continue
            graph = FeynmanGraph(
                tuple(entry["graph"]["vertices"]),
                tuple(tuple(e) for e in entry["graph"]["edges"]),
            )
            d = entry["geometry"]["dim"]
            fn = parse_testfn(entry["testfn"], graph.n_vertices, d)
            pairs = combinations(range(graph.n_vertices), 2)
            assert support_separation(fn, pairs) >= 10.0, entry["name"]
            key = (graph.n_vertices, graph.edges, d)
            per_graph[key] = per_graph.get(key, 0) + 1
        well_covered = [key for key, count in per_graph.items() if count >= 3]
        assert len(well_covered) >= 5

    def test_shipped_banana_entries(self):
        """测试自带语料包含 d=4 双边香蕉图的平移与不交并检查"""
        banana = [[1, 2], [1, 2]]
        entries = load_corpus(CORPUS)
        kinds = {
            entry["kind"]
            for entry in entries
            if entry["graph"]["edges"] == banana and entry["geometry"]["dim"] == 4
        }
        assert {"translation", "compatibility", "factorization"} <= kinds
        (union,) = [
            e for e in entries if e["kind"] == "factorization" and e["geometry"]["dim"] == 4
        ]
        assert union["other_graph"]["edges"] == banana

    @pytest.mark.slow
    def test_shipped_corpus_passes(self):
        """测试自带语料全部通过"""
        reports = verify_corpus(CORPUS)
        assert all(r.passed for r in reports), [r.name for r in reports if not r.passed]
