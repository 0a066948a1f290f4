"""测试平直几何, 复幂 Green 函数与试验函数"""

from math import factorial

import numpy as np
import pytest
from scipy import integrate
from scipy.special import rgamma

from germrenorm.core.exceptions import (
    ConvergenceRegionError,
    DivergentTailError,
    InputError,
    PreconditionError,
    ResourceCapError,
)
from germrenorm.geometry.flat import FlatGeometry, flat_heat_kernel
from germrenorm.geometry.green import (
    full_green_mixture,
    green_function,
    green_power_closed_form,
    green_power_quadrature,
    green_tail,
    head_remainder_mixture,
    remainder_ratio,
    tail_mixture,
)
from germrenorm.geometry.testfn import (
    Coupling,
    EffectiveTestFunction,
    TestFunction,
    effective,
    testfn_eval_deriv,
)
from germrenorm.numerics.gaussian import GaussianMixture, integrate_profile


def _heat(dim: int, mass: float, r: float, t: float) -> float:
    return (4.0 * np.pi * t) ** (-dim / 2.0) * np.exp(-(r**2) / (4.0 * t) - t * mass**2)


class TestFlatGeometry:
    """平直几何的参数与热核"""

    def test_defaults(self):
        """测试默认为单位度规无质量"""
        geom = FlatGeometry(4)
        assert np.array_equal(geom.metric_matrix, np.eye(4))
        assert geom.is_isotropic
        assert geom.isotropic_scale == 1.0
        assert not geom.has_zero_mode

    @pytest.mark.parametrize(
        "kwargs,match",
        [
            ({"dim": 0}, "positive integer"),
            ({"dim": 2, "mass": -1.0}, "nonnegative"),
            ({"dim": 2, "metric": ((1.0, 0.0),)}, "must be 2×2"),
            ({"dim": 2, "metric": ((1.0, 0.5), (0.0, 1.0))}, "symmetric"),
            ({"dim": 2, "metric": ((1.0, 2.0), (2.0, 1.0))}, "positive definite"),
        ],
    )
    def test_invalid_geometry(self, kwargs, match):
        """测试非法几何参数"""
        with pytest.raises(InputError, match=match):
            FlatGeometry(**kwargs)

    def test_anisotropic_metric(self):
        """测试各向异性度规的距离"""
        geom = FlatGeometry.from_document(2, 0.0, [[2.0, 0.0], [0.0, 1.0]])
        assert geom.dist2(np.array([1.0, 1.0]), np.zeros(2)) == pytest.approx(3.0)
        assert not geom.is_isotropic
        with pytest.raises(PreconditionError, match="isotropic"):
            _ = geom.isotropic_scale

    def test_document_round_trip(self):
        """测试文档格式"""
        geom = FlatGeometry(3, 0.5, ((2.0, 0, 0), (0, 2.0, 0), (0, 0, 2.0)))
        doc = geom.to_document()
        assert doc["type"] == "flat"
        assert FlatGeometry.from_document(doc["dim"], doc["mass"], doc["metric"]) == geom
        assert FlatGeometry(2).to_document()["metric"] is None

    def test_heat_coefficients(self):
        """测试热核系数 a_k = (-m²)^k / k!"""
        geom = FlatGeometry(3, mass=2.0)
        assert [geom.heat_coefficient(k) for k in range(3)] == [1.0, -4.0, 8.0]
        assert np.all(geom.cutoff(np.array([0.0, 9.0])) == 1.0)

    def test_heat_kernel(self):
        """测试热核数值与质量衰减"""
        geom = FlatGeometry(2, mass=0.5)
        value = geom.heat_kernel(0.3, np.array([1.0, 0.0]), np.zeros(2))
        assert value == pytest.approx(_heat(2, 0.5, 1.0, 0.3))
        with pytest.raises(InputError):
            flat_heat_kernel(geom, 0.0, np.zeros(2), np.zeros(2))

    def test_heat_kernel_normalized(self):
        """测试无质量热核的积分为 1"""
        geom = FlatGeometry(1)
        total, _ = integrate.quad(
            lambda x: float(geom.heat_kernel(0.7, np.array([x]), np.zeros(1))), -30, 30
        )
        assert total == pytest.approx(1.0, rel=1e-10)


class TestGreenPowers:
    """Laplace 算子复幂的积分核"""

    @pytest.mark.parametrize("dim", [3, 4, 5])
    @pytest.mark.parametrize("r", [0.1, 1.0, 10.0])
    def test_closed_form_matches_quadrature(self, dim, r):
        """测试闭式与双指数求积一致"""
        geom = FlatGeometry(dim)
        for s in (1.0, 0.35 * dim / 2.0, 0.8 + 0.3j):
            exact = green_power_closed_form(dim, s, r)
            numeric = green_power_quadrature(geom, s, r)
            assert abs(numeric - exact) <= 1e-7 * abs(exact)

    def test_known_values(self):
        """测试 d=4, s=1 与 d=2, s=1/2 的闭式值"""
        assert green_power_closed_form(4, 1.0, 2.0) == pytest.approx(1.0 / (4 * np.pi**2 * 4.0))
        assert green_power_closed_form(2, 0.5, 3.0) == pytest.approx(1.0 / (2 * np.pi * 3.0))

    def test_convergence_region(self):
        """测试收敛域之外报错"""
        geom = FlatGeometry(4)
        with pytest.raises(ConvergenceRegionError):
            green_power_quadrature(geom, 2.5, 1.0)
        with pytest.raises(ConvergenceRegionError):
            green_power_quadrature(geom, 1.0, 0.0)
        with pytest.raises(ConvergenceRegionError):
            green_power_closed_form(4, -0.5, 1.0)

    def test_massive_green_function(self):
        """测试 d=3 有质量 Green 函数为 Yukawa 势"""
        geom = FlatGeometry(3, mass=1.0)
        r = np.array([0.5, 1.0, 3.0])
        assert np.allclose(green_function(geom, r), np.exp(-r) / (4 * np.pi * r), rtol=1e-12)
        assert green_power_quadrature(geom, 1.0, 1.0).real == pytest.approx(
            np.exp(-1.0) / (4 * np.pi), rel=1e-8
        )

    def test_massless_green_function(self):
        """测试 d=4 无质量 Green 函数, d ≤ 2 不存在"""
        assert green_function(FlatGeometry(4), 2.0) == pytest.approx(1.0 / (16 * np.pi**2))
        with pytest.raises(PreconditionError):
            green_function(FlatGeometry(2), 1.0)


class TestGreenPieces:
    """t ≥ 1 尾部与有质量余项"""

    def test_tail_divergence(self):
        """测试 d ≤ 2 无质量尾部发散"""
        with pytest.raises(DivergentTailError):
            tail_mixture(FlatGeometry(2), 10)
        with pytest.raises(DivergentTailError):
            full_green_mixture(FlatGeometry(1))
        tail_mixture(FlatGeometry(2, mass=0.5), 10)

    @pytest.mark.parametrize("geom", [FlatGeometry(4), FlatGeometry(3, mass=0.7)])
    def test_tail_mixture_matches_jet(self, geom):
        """测试尾部高斯混合与尾部 Jet 的常数项一致"""
        r = 0.8
        jet = green_tail(geom, r, 0)
        mixture = tail_mixture(geom, 30)
        assert mixture(r**2) == pytest.approx(jet.evaluate_at_base().real, rel=1e-7)

    def test_tail_jet_derivative(self):
        """测试尾部 Jet 的一阶系数与差分一致"""
        geom = FlatGeometry(4)
        r, h = 0.8, 1e-3

        def tail(s):
            value, _ = integrate.quad(lambda t: _heat(4, 0.0, r, t) * t ** (s - 1), 1, np.inf)
            return value * rgamma(s)

        jet = green_tail(geom, r, 2)
        slope = (tail(1 + h) - tail(1 - h)) / (2 * h)
        assert jet.coefficient((1,)).real == pytest.approx(slope, rel=1e-5)

    @pytest.mark.parametrize("geom", [FlatGeometry(4), FlatGeometry(3, mass=1.0)])
    def test_full_mixture(self, geom):
        """测试整条半直线的高斯混合重现 Green 函数"""
        mixture = full_green_mixture(geom, level=4)
        r = np.array([0.5, 1.0, 2.0])
        assert np.allclose(mixture(r**2), green_function(geom, r), rtol=1e-7)

    def test_remainder_ratio(self):
        """测试 Taylor 余项比值在两侧公式一致"""
        for p in (0, 1, 2):
            for x in (0.3, 1.0, 2.5):
                partial = sum((-x) ** k / factorial(k) for k in range(p + 1))
                expected = (np.exp(-x) - partial) / x ** (p + 1)
                assert remainder_ratio(p, np.array([x]))[0] == pytest.approx(expected, rel=1e-9)
        assert remainder_ratio(1, np.array([0.0]))[0] == pytest.approx(0.5)

    def test_head_remainder(self):
        """测试 t ≤ 1 的有质量余项与直接积分一致"""
        geom = FlatGeometry(3, mass=1.0)
        p, r = 1, 1.0
        head, _ = integrate.quad(lambda t: _heat(3, 1.0, r, t), 0, 1)
        expansion = 0.0
        for k in range(p + 1):
            moment, _ = integrate.quad(lambda t, k=k: t**k * _heat(3, 0.0, r, t), 0, 1)
            expansion += (-1.0) ** k / factorial(k) * moment
        mixture = head_remainder_mixture(geom, p, 40)
        assert mixture(r**2) == pytest.approx(head - expansion, rel=1e-5)

    def test_head_remainder_edge_cases(self):
        """测试无质量时余项为空, 阶数过低时报错"""
        assert len(head_remainder_mixture(FlatGeometry(4), 1, 10)) == 0
        with pytest.raises(PreconditionError, match="too small"):
            head_remainder_mixture(FlatGeometry(4, mass=1.0), 0, 10)


@pytest.fixture
def two_point_fn():
    """两点 d=1 多项式乘高斯"""
    return TestFunction.gaussian(
        2, 1, center=(0.3, -0.2), width=0.7, poly={(1, 0): 1.0, (0, 2): 0.5}
    )


class TestTestFunction:
    """试验函数的运算"""

    def test_evaluate(self, two_point_fn):
        """测试求值"""
        x, y = 0.4, 0.1
        gauss = np.exp(-((x - 0.3) ** 2 + (y + 0.2) ** 2) / (2 * 0.49))
        assert two_point_fn.evaluate([x, y])[0] == pytest.approx((x + 0.5 * y**2) * gauss)
        with pytest.raises(InputError):
            two_point_fn.evaluate([0.0])

    @pytest.mark.parametrize("beta", [(1, 0), (0, 1), (2, 1)])
    def test_derivative_matches_differences(self, two_point_fn, beta):
        """测试导数与中心差分一致"""
        point = np.array([0.4, 0.1])
        h = 1e-3

        def partial(fn_values, axis):
            def f(p):
                up, down = p.copy(), p.copy()
                up[axis] += h
                down[axis] -= h
                return (fn_values(up) - fn_values(down)) / (2 * h)

            return f

        f = lambda p: two_point_fn.evaluate(p)[0]  # noqa: E731
        for axis, count in enumerate(beta):
            for _ in range(count):
                f = partial(f, axis)
        exact = testfn_eval_deriv(two_point_fn, beta, point)
        assert exact == pytest.approx(f(point), rel=1e-4, abs=1e-6)

    def test_derivative_cap(self, two_point_fn):
        """测试导数阶数上限"""
        with pytest.raises(ResourceCapError):
            two_point_fn.derivative((13, 0))
        with pytest.raises(InputError):
            two_point_fn.derivative((1,))

    def test_shifted(self, two_point_fn):
        """测试平移 φ(x - a)"""
        moved = two_point_fn.shifted([0.25])
        point = np.array([0.4, 0.1])
        assert moved.evaluate(point)[0] == pytest.approx(
            two_point_fn.evaluate(point - 0.25)[0], rel=1e-12
        )
        with pytest.raises(InputError):
            two_point_fn.shifted([1.0, 2.0])

    def test_linear_combination(self, two_point_fn):
        """测试数乘与加法"""
        other = TestFunction.gaussian(2, 1, width=1.3)
        combined = two_point_fn.scaled(2.0) + other.scaled(-1.0)
        point = np.array([0.2, -0.6])
        expected = 2.0 * two_point_fn.evaluate(point) - other.evaluate(point)
        assert combined.evaluate(point) == pytest.approx(expected)
        with pytest.raises(InputError):
            two_point_fn + TestFunction.gaussian(1, 1)

    def test_tensor(self, two_point_fn):
        """测试张量积 φ ⊠ ψ"""
        single = TestFunction.gaussian(1, 1, center=(1.0,), width=0.5)
        product = two_point_fn.tensor(single)
        assert product.n_points == 3
        point = np.array([0.4, 0.1, 0.8])
        assert product.evaluate(point)[0] == pytest.approx(
            two_point_fn.evaluate(point[:2])[0] * single.evaluate(point[2:])[0]
        )

    def test_restricted_diagonal(self, two_point_fn):
        """测试对角线限制 x ↦ φ(x, x)"""
        diagonal = two_point_fn.restricted_diagonal()
        assert diagonal.n_points == 1
        for x in (-0.5, 0.0, 0.7):
            assert diagonal.evaluate([x])[0] == pytest.approx(
                two_point_fn.evaluate([x, x])[0], rel=1e-12
            )

    def test_invalid_terms(self):
        """测试非法的项"""
        with pytest.raises(InputError, match="widths must be positive"):
            TestFunction.gaussian(1, 2, width=0.0)
        with pytest.raises(InputError, match="coordinates"):
            TestFunction.from_terms(2, 1, [{"center": [0.0]}])

    def test_closed_form_integral(self):
        """测试高斯轮廓的闭式积分"""
        w, c = 0.8, 0.3
        fn = TestFunction.gaussian(1, 1, center=(c,), width=w, poly={(2,): 1.0})
        (profile,) = fn.to_profiles()
        expected = np.sqrt(2 * np.pi) * w * (w**2 + c**2)
        assert integrate_profile(profile)[0] == pytest.approx(expected, rel=1e-12)

    def test_support_box(self, two_point_fn):
        """测试支撑盒"""
        low, high = two_point_fn.support_box(spread=2.0)
        assert np.allclose(low, [0.3 - 1.4, -0.2 - 1.4])
        assert np.allclose(high, [0.3 + 1.4, -0.2 + 1.4])


class TestEffectiveTestFunction:
    """带冻结径向因子的试验函数"""

    def test_evaluate_and_integrate(self, two_point_fn):
        """测试耦合后的求值与闭式积分"""
        mixture = GaussianMixture(np.array([0.5, 2.0]), np.array([0.3, 1.5]))
        fn = TestFunction.gaussian(2, 1, center=(0.3, -0.2), width=0.7)
        coupled = EffectiveTestFunction(fn, (Coupling(0, 1, mixture),))
        point = np.array([0.4, 0.1])
        assert coupled.evaluate(point)[0] == pytest.approx(
            fn.evaluate(point)[0] * mixture(np.array(0.09))
        )

        grid = np.linspace(-8.0, 8.0, 801)
        xx, yy = np.meshgrid(grid, grid, indexing="ij")
        values = coupled.evaluate(np.stack([xx.ravel(), yy.ravel()], axis=1)).reshape(xx.shape)
        brute = integrate.trapezoid(integrate.trapezoid(values, grid, axis=1), grid)
        closed = sum(integrate_profile(p)[0] for p in coupled.to_profiles())
        assert closed == pytest.approx(brute, rel=1e-8)

    def test_checks(self, two_point_fn):
        """测试耦合端点与度规检查"""
        mixture = GaussianMixture(np.ones(1), np.ones(1))
        with pytest.raises(InputError):
            EffectiveTestFunction(two_point_fn, (Coupling(0, 2, mixture),))
        with pytest.raises(InputError):
            EffectiveTestFunction(two_point_fn, (), np.eye(2))
        anisotropic = TestFunction.gaussian(2, 2)
        frozen = EffectiveTestFunction(
            anisotropic, (Coupling(0, 1, mixture),), np.diag([1.0, 2.0])
        )
        with pytest.raises(PreconditionError):
            frozen.to_profiles()

    def test_effective_wraps_once(self, two_point_fn):
        """测试 effective 不重复包装"""
        wrapped = effective(two_point_fn)
        assert wrapped.base is two_point_fn
        assert effective(wrapped) is wrapped
