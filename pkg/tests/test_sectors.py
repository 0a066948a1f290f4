"""测试扇区坐标与光滑被积函数 χ"""

import numpy as np
import pytest

from germrenorm.config import ChiMethod, QuadratureConfig
from germrenorm.core.exceptions import (
    DimensionMismatchError,
    InputError,
    PreconditionError,
    ResourceCapError,
)
from germrenorm.geometry.flat import FlatGeometry
from germrenorm.geometry.testfn import TestFunction, effective
from germrenorm.germs.forms import LinearForm
from germrenorm.graphs.model import FeynmanGraph, LabelledGraph
from germrenorm.sectors import (
    AnalyticChi,
    ChiJetCache,
    build_chart,
    chi_evaluate,
    chi_t_jet,
    make_chi_factor,
    pi_forward,
    pi_inverse,
    pullback_edge,
    required_ibp_depths,
)

TRIANGLE = LabelledGraph(FeynmanGraph((1, 2, 3), ((1, 2), (2, 3), (1, 3))))
BANANA_1 = LabelledGraph(FeynmanGraph((1, 2), ((1, 2),)))
BANANA_2 = LabelledGraph(FeynmanGraph((1, 2), ((1, 2), (1, 2))))

HERMITE = QuadratureConfig(chi_method=ChiMethod.HERMITE, hermite_order=20, legendre_order=200)


def _single_edge_chi(t: float, width: float) -> float:
    """χ(t) = 4πw / √(1 + t²/w²) for one edge in d=1 and a centered Gaussian."""
    return 4.0 * np.pi * width / np.sqrt(1.0 + t**2 / width**2)


def _single_edge_dchi(t: float, width: float) -> float:
    return -4.0 * np.pi * t / (width * (1.0 + t**2 / width**2) ** 1.5)


class TestSectorChart:
    """扇区图的指数与 IBP 深度"""

    def test_triangle_offsets(self):
        """测试 d=4 三角形的指数偏移 (2, 4, 2)"""
        chart = build_chart(TRIANGLE, (1, 2, 3), 4)
        assert [offset for _, offset in chart.exponent_forms] == [2, 4, 2]
        assert required_ibp_depths(chart) == (0, 0, 0)
        assert chart.tree == {1, 2}
        assert chart.n_variables == 3

    def test_banana_offsets(self):
        """测试 d=4 双边香蕉图最后一步需要一次分部积分"""
        chart = build_chart(BANANA_2, (1, 2), 4)
        assert [offset for _, offset in chart.exponent_forms] == [2, 0]
        assert required_ibp_depths(chart) == (0, 1)
        assert chart.exponent_forms[1][0] == LinearForm.parse([2, 2])

    def test_labels_shift_offsets(self):
        """测试热核标号 k_e 提高指数"""
        labelled = LabelledGraph(BANANA_2.graph, (0, 1))
        chart = build_chart(labelled, (1, 2), 4)
        assert [offset for _, offset in chart.exponent_forms] == [2, 2]
        assert required_ibp_depths(chart) == (0, 0)

    def test_document(self):
        """测试扇区图的文档形式"""
        document = build_chart(TRIANGLE, (2, 1, 3), 4).to_document()
        assert document["permutation"] == [2, 1, 3]
        assert document["tree"] == [1, 2]
        assert document["cycles"][0]["edge"] == 3
        assert document["exponents"][0]["sigma"] == ["0", "2", "0"]
        assert document["ibp_depths"] == [0, 0, 0]

    def test_invalid_permutation(self):
        """测试非法排列"""
        with pytest.raises(InputError):
            build_chart(TRIANGLE, (1, 2), 4)


class TestBlowUpMap:
    """爆破映射及其逆"""

    @pytest.fixture
    def chart(self):
        return build_chart(TRIANGLE, (2, 1, 3), 2)

    def test_round_trip(self, chart):
        """测试 π 与 π⁻¹ 互逆"""
        rng = np.random.default_rng(7)
        t = rng.uniform(0.1, 0.9, size=3)
        x = rng.normal(size=2)
        h = rng.normal(size=(2, 2))
        positions, lengths = pi_forward(chart, t, x, h)
        assert lengths[1] < lengths[0] < lengths[2] < 1.0
        t_back, x_back, h_back = pi_inverse(chart, positions, lengths)
        assert np.allclose(t_back, t)
        assert np.allclose(x_back, x[None, :])
        assert np.allclose(h_back, h)

    def test_outside_sector(self, chart):
        """测试不在开扇区内的长度"""
        positions = np.zeros((3, 2))
        with pytest.raises(InputError, match="outside the open sector"):
            pi_inverse(chart, positions, [0.1, 0.2, 0.3])
        with pytest.raises(DimensionMismatchError):
            pi_inverse(chart, positions, [0.1, 0.2])
        with pytest.raises(DimensionMismatchError):
            pi_forward(chart, [0.5, 0.5], np.zeros(2), np.zeros((2, 2)))

    def test_pullback_is_smooth_quotient(self, chart):
        """测试 π*(d²/ℓ) 与直接相除一致"""
        geometry = FlatGeometry(2)
        t = np.array([0.3, 0.6, 0.8])
        x = np.array([0.2, -0.1])
        h = np.array([[1.0, 0.5], [-0.3, 0.7]])
        positions, lengths = pi_forward(chart, t, x, h)
        base = TRIANGLE.graph
        for eid in base.edge_ids:
            a, b = base.edge(eid)
            diff = positions[base.vertex_position(b)] - positions[base.vertex_position(a)]
            expected = float(diff @ diff) / lengths[base.edge_position(eid)]
            assert pullback_edge(chart, eid, t, x, h, geometry) == pytest.approx(expected)

    def test_pullback_at_boundary(self, chart):
        """测试 t=0 处拉回仍有限"""
        geometry = FlatGeometry(2)
        h = np.array([[1.0, 0.0], [0.0, 2.0]])
        value = pullback_edge(chart, 3, [0.0, 0.0, 0.5], np.zeros(2), h, geometry)
        assert np.isfinite(value)


class TestChi:
    """χ_σ 的闭式计算与数值交叉验证"""

    @pytest.mark.parametrize("t", [0.0, 0.3, 1.0])
    def test_single_edge_closed_form(self, t):
        """测试单边图的 χ 与闭式一致"""
        chart = build_chart(BANANA_1, (1,), 1)
        fn = TestFunction.gaussian(2, 1, width=0.8)
        value = chi_evaluate(chart, [t], fn, FlatGeometry(1))
        assert value == pytest.approx(_single_edge_chi(t, 0.8), rel=1e-10)

    def test_single_edge_quadrature(self):
        """测试 Gauss-Hermite 路径与闭式一致"""
        chart = build_chart(BANANA_1, (1,), 1)
        fn = TestFunction.gaussian(2, 1, width=0.8)
        value = chi_evaluate(chart, [0.4], fn, FlatGeometry(1), HERMITE)
        assert value == pytest.approx(_single_edge_chi(0.4, 0.8), rel=1e-7)

    def test_single_edge_jet(self):
        """测试 t-导数: 解析 Jet 与有限差分都与闭式一致"""
        chart = build_chart(BANANA_1, (1,), 1)
        fn = TestFunction.gaussian(2, 1, width=0.8)
        exact = _single_edge_dchi(0.4, 0.8)
        analytic = chi_t_jet(chart, [0.4], [1], fn, FlatGeometry(1))
        assert analytic == pytest.approx(exact, rel=1e-10)
        differenced = chi_t_jet(chart, [0.4], [1], fn, FlatGeometry(1), HERMITE)
        assert differenced == pytest.approx(exact, rel=1e-5)

    def test_triangle_methods_agree(self):
        """测试三角形上解析 χ 与张量积分一致"""
        chart = build_chart(TRIANGLE, (1, 2, 3), 1)
        fn = TestFunction.gaussian(
            3, 1, center=(0.2, -0.1, 0.3), width=0.8, poly={(1, 0, 0): 1.0, (0, 0, 2): 0.5}
        )
        t = [0.3, 0.5, 0.6]
        analytic = chi_evaluate(chart, t, fn, FlatGeometry(1))
        quadrature = chi_evaluate(chart, t, fn, FlatGeometry(1), HERMITE)
        assert quadrature == pytest.approx(analytic, rel=1e-6)

    def test_jet_matches_finite_differences(self):
        """测试双边香蕉图的混合 t-导数与中心差分一致"""
        chart = build_chart(BANANA_2, (1, 2), 2)
        fn = TestFunction.gaussian(2, 2, center=(0.1, 0.0, -0.2, 0.1), width=0.9)
        geometry = FlatGeometry(2)
        t, step = np.array([0.4, 0.6]), 1e-3

        def chi(point):
            return chi_evaluate(chart, point, fn, geometry)

        first = (chi(t + [step, 0]) - chi(t - [step, 0])) / (2 * step)
        assert chi_t_jet(chart, t, [1, 0], fn, geometry) == pytest.approx(first, rel=1e-5)
        mixed = (
            chi(t + [step, step])
            - chi(t + [step, -step])
            - chi(t + [-step, step])
            + chi(t - [step, step])
        ) / (4 * step**2)
        assert chi_t_jet(chart, t, [1, 1], fn, geometry) == pytest.approx(mixed, rel=1e-5)

    def test_taylor_grid_batches(self):
        """测试分块计算与整批计算一致"""
        chart = build_chart(BANANA_2, (1, 2), 2)
        fn = TestFunction.gaussian(2, 2, width=0.9)
        points = np.random.default_rng(3).uniform(0, 1, size=(7, 2))
        whole = AnalyticChi(chart, effective(fn), FlatGeometry(2)).taylor_grid(points, (2, 1))
        chunked = AnalyticChi(chart, effective(fn), FlatGeometry(2), chunk_size=3)
        assert np.allclose(chunked.taylor_grid(points, (2, 1)), whole)
        assert whole.shape == (7, 6)

    def test_checks(self):
        """测试导数上限, 维数与各向异性度量"""
        chart = build_chart(BANANA_1, (1,), 1)
        fn = TestFunction.gaussian(2, 1)
        with pytest.raises(ResourceCapError):
            chi_t_jet(chart, [0.5], [13], fn, FlatGeometry(1))
        with pytest.raises(DimensionMismatchError):
            chi_t_jet(chart, [0.5], [1, 0], fn, FlatGeometry(1))
        with pytest.raises(DimensionMismatchError):
            chi_evaluate(chart, [0.5], TestFunction.gaussian(3, 1), FlatGeometry(1))
        chart2 = build_chart(BANANA_1, (1,), 2)
        anisotropic = FlatGeometry(2, metric=((1.0, 0.0), (0.0, 2.0)))
        with pytest.raises(PreconditionError):
            make_chi_factor(chart2, TestFunction.gaussian(2, 2), anisotropic)


class TestChiJetCache:
    """χ-jet 网格缓存"""

    @pytest.fixture
    def factor(self):
        chart = build_chart(BANANA_2, (1, 2), 2)
        return make_chi_factor(chart, TestFunction.gaussian(2, 2), FlatGeometry(2))

    def test_memory_hits(self, factor):
        """测试内存缓存命中"""
        cache = ChiJetCache(maxsize=4)
        points = np.array([[0.5, 0.5]])
        first = cache.taylor_grid(factor, points, (1, 1))
        second = cache.taylor_grid(factor, points, (1, 1))
        assert np.array_equal(first, second)
        assert (cache.hits, cache.misses) == (1, 1)
        cache.taylor_grid(factor, points, (2, 1))
        assert cache.misses == 2
        cache.clear()
        assert (cache.hits, cache.misses) == (0, 0)

    def test_disk_cache(self, factor, tmp_path):
        """测试磁盘缓存跨实例复用"""
        points = np.array([[0.2, 0.7], [0.9, 0.1]])
        grid = ChiJetCache(directory=tmp_path).taylor_grid(factor, points, (1, 2))
        assert len(list(tmp_path.glob("*.npz"))) == 1
        fresh = ChiJetCache(directory=tmp_path)
        assert np.array_equal(fresh.taylor_grid(factor, points, (1, 2)), grid)
        assert (fresh.hits, fresh.misses) == (1, 0)

    def test_key_depends_on_inputs(self, factor):
        """测试键依赖于点与截断盒子"""
        points = np.array([[0.5, 0.5]])
        key = ChiJetCache.key(factor, points, (1, 1))
        assert key == ChiJetCache.key(factor, points.copy(), (1, 1))
        assert key != ChiJetCache.key(factor, points + 0.1, (1, 1))
        assert key != ChiJetCache.key(factor, points, (1, 2))
        assert len(key) == 64
