"""
行列式引擎单元测试
"""
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from condensation import (
    Matrix, bareiss_det, condensation_det, condensation_step, condensation_trace_to_json, det_poly,
    evaluate_det, format_matrix_text, gen_matrix, leibniz_det, minor_det, parse_matrix_text
)
from exceptions import MatrixException, ParseException, SizeGuardException, ZeroDivisorException
from scalars import FormalPoly

FIXTURE = Matrix.from_rows([[1, 2, 3], [4, 5, 6], [7, 8, 10]])


def sympy_det(M):
    return sympy.Matrix(M.rows()).det(method="bareiss")


@st.composite
def square_matrices(draw, max_n=5, bound=9):
    n = draw(st.integers(1, max_n))
    entries = draw(st.lists(st.integers(-bound, bound), min_size=n * n, max_size=n * n))
    return Matrix(n, n, tuple(entries))


class TestMatrix:
    """矩阵类型测试类"""

    def test_from_rows(self):
        """测试按行构造"""
        assert FIXTURE.n_rows == 3
        assert FIXTURE.entry(2, 2) == 10
        assert FIXTURE.rows()[1] == [4, 5, 6]

    def test_ragged_rows(self):
        """测试行长度不一致"""
        with pytest.raises(MatrixException):
            Matrix.from_rows([[1, 2], [3]])

    def test_entry_count(self):
        """测试元素个数必须等于行数乘列数"""
        with pytest.raises(MatrixException):
            Matrix(2, 2, (1, 2, 3))

    def test_helpers(self):
        """测试单位阵、全 1 阵、子矩阵与乘法"""
        assert Matrix.identity(2).rows() == [[1, 0], [0, 1]]
        assert Matrix.ones(2, 3).rows() == [[1, 1, 1], [1, 1, 1]]
        assert FIXTURE.submatrix(range(1, 3), range(0, 2)).rows() == [[4, 5], [7, 8]]
        assert FIXTURE.matmul(Matrix.identity(3)) == FIXTURE
        assert FIXTURE.is_integral()
        assert not Matrix.from_rows([["1/2"]]).is_integral()


class TestOracles:
    """Leibniz 与 Bareiss 测试类"""

    def test_leibniz_examples(self):
        """测试 Leibniz 展开"""
        assert leibniz_det(Matrix.identity(5)) == 1
        assert leibniz_det(Matrix.from_rows([[1, 2], [3, 4]])) == -2
        assert leibniz_det(FIXTURE) == -3

    def test_leibniz_guard(self):
        """测试 Leibniz 规模上限"""
        with pytest.raises(SizeGuardException) as exc_info:
            leibniz_det(Matrix.identity(12))
        assert "n ≤ 9" in str(exc_info.value)

    def test_non_square(self):
        """测试非方阵"""
        M = Matrix.ones(2, 3)
        for method in (leibniz_det, bareiss_det, condensation_det):
            with pytest.raises(MatrixException):
                method(M)

    def test_bareiss_examples(self):
        """测试 Bareiss 消元"""
        assert bareiss_det(Matrix.identity(20)) == 1
        assert bareiss_det(FIXTURE) == -3
        assert bareiss_det(Matrix.from_rows([[1, 2, 3], [4, 5, 6], [1, 2, 3]])) == 0
        assert bareiss_det(Matrix.from_rows([[0, 1], [1, 0]])) == -1

    def test_bareiss_rational(self):
        """测试有理数矩阵"""
        M = Matrix.from_rows([["1/2", "1/3"], ["1/4", "1/5"]])
        assert bareiss_det(M) == Fraction(1, 10) - Fraction(1, 12)
        assert leibniz_det(M) == bareiss_det(M)

    @settings(max_examples=100, deadline=None)
    @given(square_matrices(max_n=6))
    def test_oracles_agree_with_sympy(self, M):
        """测试与 sympy 的行列式一致"""
        expected = sympy_det(M)
        assert leibniz_det(M) == expected
        assert bareiss_det(M) == expected

    def test_bareiss_against_sympy_large(self):
        """测试较大矩阵与 sympy 一致"""
        for seed in range(5):
            M = gen_matrix("random", 12, bound=50, seed=seed)
            assert bareiss_det(M) == sympy_det(M)

    def test_multiplicativity(self):
        """测试 det(M·N) = det(M)·det(N)"""
        for seed in range(20):
            M = gen_matrix("random", 5, seed=seed)
            N = gen_matrix("random", 5, seed=seed + 1000)
            assert condensation_det(M.matmul(N))[0] == bareiss_det(M) * bareiss_det(N)


class TestCondensationStep:
    """凝聚单步测试类"""

    def test_first_step(self):
        """测试第一步得到全部 2×2 连续子式"""
        layer2 = condensation_step(FIXTURE, Matrix.ones(4))
        assert layer2.rows() == [[-3, -3], [-3, 2]]

    def test_second_step(self):
        """测试第二步以 M 的内部为除数"""
        layer2 = condensation_step(FIXTURE, Matrix.ones(4))
        assert condensation_step(layer2, FIXTURE).rows() == [[-3]]

    def test_zero_divisor_location(self):
        """测试除数为零时报告位置"""
        previous = Matrix.from_rows([[1, 1, 1], [1, 0, 1], [1, 1, 1]])
        with pytest.raises(ZeroDivisorException) as exc_info:
            condensation_step(Matrix.from_rows([[1, 2], [3, 4]]), previous, divisor_layer=1)
        assert exc_info.value.layer == 1
        assert exc_info.value.position == (1, 1)

    def test_dimension_mismatch(self):
        """测试上一层尺寸不匹配"""
        with pytest.raises(MatrixException):
            condensation_step(FIXTURE, Matrix.ones(3))

    @pytest.mark.parametrize("seed", range(5))
    def test_singular_interior_fails_on_two_by_two_divisors(self, seed):
        """测试植入的零 2×2 子式让以 2×2 子式为除数的一步失败"""
        M = gen_matrix("singular-interior", 4, seed=seed)
        layer2 = condensation_step(M, Matrix.ones(5))
        layer3 = condensation_step(layer2, M, divisor_layer=1)
        with pytest.raises(ZeroDivisorException) as exc_info:
            condensation_step(layer3, layer2, divisor_layer=2)
        assert exc_info.value.layer == 2
        assert exc_info.value.position == (1, 1)


class TestCondensationDet:
    """凝聚法测试类"""

    def test_fixture(self):
        """测试 3×3 示例"""
        value, trace = condensation_det(FIXTURE)
        assert value == -3
        assert trace.repairs == ()
        assert not trace.fallback_used
        assert [layer.rows() for layer in trace.layers] == [FIXTURE.rows(), [[-3, -3], [-3, 2]], [[-3]]]

    def test_small_cases(self):
        """测试 n = 0, 1, 2"""
        assert condensation_det(Matrix(0, 0, ()))[0] == 1
        assert condensation_det(Matrix.from_rows([[7]]))[0] == 7
        assert condensation_det(Matrix.identity(1))[0] == 1
        assert condensation_det(Matrix.from_rows([[1, 2], [3, 4]]))[0] == -2

    def test_vanishing_central_minor(self):
        """测试内部 2×2 块全为 1"""
        M = Matrix.from_rows([[2, 3, 5, 7], [1, 1, 1, 4], [6, 1, 1, 8], [9, 2, 3, 5]])
        value, trace = condensation_det(M)
        assert value == bareiss_det(M)
        assert len(trace.repairs) >= 1 or trace.fallback_used

    def test_fallback_without_retries(self):
        """测试不允许修复时回退到 Bareiss"""
        M = Matrix.from_rows([[2, 3, 5], [1, 0, 4], [6, 1, 8]])
        value, trace = condensation_det(M, retries=0)
        assert value == bareiss_det(M)
        assert trace.fallback_used
        assert trace.repairs == ()

    def test_repairs_are_recorded(self):
        """测试修复记录"""
        M = Matrix.from_rows([[2, 3, 5], [1, 0, 4], [6, 1, 8]])
        value, trace = condensation_det(M, retries=10, seed=3)
        assert value == bareiss_det(M)
        repair = trace.repairs[0]
        assert repair.retry == 1
        assert repair.divisor_layer == 1
        assert repair.position == (1, 1)
        assert repair.target_row == 2
        assert repair.source_row in (1, 3)
        assert repair.factor in (-3, -2, -1, 1, 2, 3)

    def test_deterministic_given_seed(self):
        """测试相同种子结果与修复完全一致"""
        M = gen_matrix("singular-interior", 6, seed=1)
        assert condensation_det(M, seed=5) == condensation_det(M, seed=5)

    def test_rational_input(self):
        """测试有理数输入按行通分"""
        M = Matrix.from_rows([["1/2", 1, 0], [2, "1/3", 1], [1, 1, "3/4"]])
        value, trace = condensation_det(M)
        assert value == leibniz_det(M)
        assert trace.scale == 2 * 3 * 4

    def test_layer_dimensions(self):
        """测试第 k 层为 (n−k+1)×(n−k+1)"""
        M = gen_matrix("vandermonde", 5)
        _, trace = condensation_det(M)
        assert [(layer.n_rows, layer.n_cols) for layer in trace.layers] == [(5 - k + 1,) * 2 for k in range(1, 6)]

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_layers_are_contiguous_minors(self, n):
        """测试无修复时第 k 层元素就是对应的连续 k×k 子式"""
        checked = 0
        for seed in range(60):
            if checked == 5:
                break
            M = gen_matrix("random", n, seed=seed)
            _, trace = condensation_det(M)
            if trace.repairs or trace.fallback_used:
                continue
            checked += 1
            for k, layer in enumerate(trace.layers, start=1):
                for i in range(n - k + 1):
                    for j in range(n - k + 1):
                        expected = minor_det(M, range(i + 1, i + k + 1), range(j + 1, j + k + 1))
                        assert layer.entry(i, j) == expected
        assert checked > 0

    @pytest.mark.parametrize("n", range(1, 8))
    def test_oracle_agreement_small(self, n):
        """测试 n ≤ 7 时三种方法完全一致"""
        for seed in range(500):
            M = gen_matrix("random", n, seed=seed)
            expected = leibniz_det(M)
            assert bareiss_det(M) == expected
            assert condensation_det(M)[0] == expected

    @pytest.mark.parametrize("n", [10, 20, 40])
    def test_oracle_agreement_large(self, n):
        """测试较大规模时凝聚法与 Bareiss 一致"""
        for seed in range(100):
            M = gen_matrix("random", n, seed=seed)
            assert condensation_det(M)[0] == bareiss_det(M)

    def test_singular_interior_corpus(self):
        """测试构造的奇异内部矩阵：总能得到正确结果并留下修复或回退记录"""
        fixtures = [gen_matrix("singular-interior", n, seed=seed) for n in range(4, 11) for seed in range(8)]
        assert len(fixtures) >= 50
        for M in fixtures:
            value, trace = condensation_det(M)
            assert value == bareiss_det(M)
            assert trace.repairs or trace.fallback_used
            assert trace.repairs[0].divisor_layer == 2

    @settings(max_examples=100, deadline=None)
    @given(square_matrices(max_n=6, bound=3), st.integers(0, 1000))
    def test_condensation_matches_bareiss(self, M, seed):
        """测试任意小矩阵上凝聚法与 Bareiss 一致"""
        assert condensation_det(M, seed=seed)[0] == bareiss_det(M)


class TestMinorsAndPolys:
    """子式与符号行列式测试类"""

    def test_empty_minor(self):
        """测试空子式为 1"""
        M = Matrix.from_rows([[1, 2], [3, 4]])
        assert minor_det(M, range(2, 2), range(2, 2)) == 1

    def test_corner_minor(self):
        """测试左上角 2×2 子式"""
        assert minor_det(FIXTURE, range(1, 3), range(1, 3)) == -3

    def test_full_minor(self):
        """测试全范围子式等于整体行列式"""
        assert minor_det(FIXTURE, range(1, 4), range(1, 4)) == bareiss_det(FIXTURE)
        assert minor_det(FIXTURE, range(1, 4), range(1, 4), method="condensation") == -3

    def test_minor_errors(self):
        """测试区间长度不同或越界"""
        with pytest.raises(MatrixException):
            minor_det(FIXTURE, range(1, 3), range(1, 4))
        with pytest.raises(MatrixException):
            minor_det(FIXTURE, range(2, 5), range(1, 4))

    def test_det_poly_examples(self):
        """测试符号行列式"""
        assert det_poly([1], [1]) == FormalPoly({((1, 1),): 1})
        assert det_poly([1, 2], [1, 2]) == FormalPoly({((1, 1), (2, 2)): 1, ((1, 2), (2, 1)): -1})
        assert det_poly([1, 2], [2, 3]) == FormalPoly({((1, 2), (2, 3)): 1, ((1, 3), (2, 2)): -1})

    def test_det_poly_guard(self):
        """测试符号行列式规模上限"""
        with pytest.raises(SizeGuardException):
            det_poly(range(1, 9), range(1, 9))
        with pytest.raises(MatrixException):
            det_poly([1, 2], [1])

    def test_evaluate_det_unknown_method(self):
        """测试未知方法名"""
        with pytest.raises(ParseException):
            evaluate_det(FIXTURE, "gauss")

    def test_evaluate_det_result(self):
        """测试结果对象"""
        result = evaluate_det(FIXTURE, "condensation")
        assert result.value == -3
        assert result.repairs == 0
        assert result.fallbacks == 0
        assert evaluate_det(FIXTURE, "leibniz").trace is None


class TestGenerators:
    """矩阵生成与文本格式测试类"""

    def test_random_is_deterministic(self):
        """测试给定种子时随机矩阵确定"""
        assert gen_matrix("random", 3, 9, seed=42) == gen_matrix("random", 3, 9, seed=42)
        assert gen_matrix("random", 3, 9, seed=42) != gen_matrix("random", 3, 9, seed=43)

    def test_vandermonde(self):
        """测试 Vandermonde 行列式"""
        assert bareiss_det(gen_matrix("vandermonde", 4, nodes=[1, 2, 3, 4])) == 12
        assert condensation_det(gen_matrix("vandermonde", 4))[0] == 12

    def test_singular_interior_shape(self):
        """测试奇异内部矩阵的构造"""
        M = gen_matrix("singular-interior", 6, seed=2)
        assert all(x != 0 for x in M.entries)
        assert minor_det(M, range(3, 5), range(3, 5)) == 0
        assert gen_matrix("singular-interior", 3).entry(1, 1) == 0

    def test_generator_errors(self):
        """测试非法参数"""
        with pytest.raises(SizeGuardException):
            gen_matrix("random", 0)
        with pytest.raises(ParseException):
            gen_matrix("hilbert", 3)
        with pytest.raises(MatrixException):
            gen_matrix("vandermonde", 3, nodes=[1, 2])

    def test_parse_matrix_text(self):
        """测试矩阵文本解析"""
        M = parse_matrix_text("# fixture\n1 2 3\n4 5 6\n\n7 8 10\n")
        assert M == FIXTURE
        assert parse_matrix_text("1/2 -3\n0 2/4\n").rows() == [[Fraction(1, 2), -3], [0, Fraction(1, 2)]]

    def test_parse_errors(self):
        """测试矩阵文本错误"""
        with pytest.raises(ParseException):
            parse_matrix_text("# only a comment\n")
        with pytest.raises(ParseException):
            parse_matrix_text("1 2\n3\n")
        with pytest.raises(ParseException) as exc_info:
            parse_matrix_text("1 2\n3 x\n")
        assert exc_info.value.details["line"] == 2

    def test_format_matrix_text(self):
        """测试矩阵文本输出"""
        M = Matrix.from_rows([["1/2", -3], [0, 1]])
        assert format_matrix_text(M) == "1/2 -3\n0 1\n"
        assert parse_matrix_text(format_matrix_text(M)) == M

    def test_trace_json(self):
        """测试凝聚过程的 JSON 输出"""
        value, trace = condensation_det(FIXTURE)
        payload = condensation_trace_to_json(trace, value)
        assert payload["determinant"] == "-3"
        assert payload["fallback_used"] is False
        assert payload["repairs"] == []
        assert payload["layers"][1] == [["-3", "-3"], ["-3", "2"]]


if __name__ == '__main__':
    pytest.main([__file__])
