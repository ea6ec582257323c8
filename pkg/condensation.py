"""
行列式引擎
Dodgson 凝聚法：第 k 层存放全部连续 k×k 子式，每一层由前两层按

    new[i][j] = (cur[i][j]·cur[i+1][j+1] − cur[i][j+1]·cur[i+1][j]) / prev[i+1][j+1]

递推得到，第 0 层取全 1 矩阵。另有 Leibniz 展开、Bareiss 无分数消元两个独立的
对照实现，子式提取，以及符号行列式 det_poly。
"""
import itertools
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, List, Literal, Optional, Sequence, Tuple

from config import config
from exceptions import (
    ErrorCode, MatrixException, ParseException, SizeGuardException, ZeroDivisorException
)
from logging_config import logger
from matchings import parity_sign
from scalars import ExactScalar, FormalPoly, exact_div, format_scalar, normalize_scalar, poly_from_terms, to_scalar

DetMethod = Literal["condensation", "bareiss", "leibniz"]
METHODS: Tuple[str, ...] = ("condensation", "bareiss", "leibniz")


@dataclass(frozen=True)
class Matrix:
    """稠密按行存放的精确矩阵；entry(i, j) 为 0 起下标"""
    n_rows: int
    n_cols: int
    entries: Tuple[ExactScalar, ...]

    def __post_init__(self):
        if self.n_rows < 0 or self.n_cols < 0 or len(self.entries) != self.n_rows * self.n_cols:
            raise MatrixException(
                f"Expected {self.n_rows}x{self.n_cols} entries, got {len(self.entries)}",
                ErrorCode.MATRIX_DIMENSION_ERROR,
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "Matrix":
        rows = [list(row) for row in rows]
        width = len(rows[0]) if rows else 0
        if any(len(row) != width for row in rows):
            raise MatrixException("Ragged rows", ErrorCode.MATRIX_DIMENSION_ERROR,
                                  details={"row_lengths": [len(row) for row in rows]})
        return cls(len(rows), width, tuple(to_scalar(x) for row in rows for x in row))

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def ones(cls, n_rows: int, n_cols: Optional[int] = None) -> "Matrix":
        n_cols = n_rows if n_cols is None else n_cols
        return cls(n_rows, n_cols, (1,) * (n_rows * n_cols))

    @property
    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    def entry(self, i: int, j: int) -> ExactScalar:
        return self.entries[i * self.n_cols + j]

    def rows(self) -> List[List[ExactScalar]]:
        return [list(self.entries[i * self.n_cols:(i + 1) * self.n_cols]) for i in range(self.n_rows)]

    def submatrix(self, rows: range, cols: range) -> "Matrix":
        """0 起下标的行、列区间"""
        return Matrix(len(rows), len(cols), tuple(self.entry(i, j) for i in rows for j in cols))

    def matmul(self, other: "Matrix") -> "Matrix":
        if self.n_cols != other.n_rows:
            raise MatrixException("Incompatible shapes for multiplication", ErrorCode.MATRIX_DIMENSION_ERROR)
        return Matrix(self.n_rows, other.n_cols, tuple(
            normalize_scalar(sum(self.entry(i, k) * other.entry(k, j) for k in range(self.n_cols)))
            for i in range(self.n_rows) for j in range(other.n_cols)
        ))

    def is_integral(self) -> bool:
        return all(isinstance(x, int) for x in self.entries)


@dataclass(frozen=True)
class RowRepair:
    """一次保行列式的修复：target_row += factor * source_row（行号 1 起）"""
    retry: int
    target_row: int
    source_row: int
    factor: int
    divisor_layer: int
    position: Tuple[int, int]


@dataclass(frozen=True)
class CondensationTrace:
    layers: Tuple[Matrix, ...]
    repairs: Tuple[RowRepair, ...] = ()
    fallback_used: bool = False
    # 有理输入按行通分后整体放大的倍数，det(M) = 末层 / scale
    scale: int = 1


@dataclass(frozen=True)
class DetResult:
    value: ExactScalar
    method: str
    trace: Optional[CondensationTrace] = field(default=None, compare=False)

    @property
    def repairs(self) -> int:
        return len(self.trace.repairs) if self.trace else 0

    @property
    def fallbacks(self) -> int:
        return int(bool(self.trace and self.trace.fallback_used))


def _require_square(M: Matrix, context: str) -> None:
    if not M.is_square:
        raise MatrixException(
            f"{context} requires a square matrix, got {M.n_rows}x{M.n_cols}",
            ErrorCode.MATRIX_NOT_SQUARE,
        )


def _integer_rows(M: Matrix) -> Tuple[List[List[int]], int]:
    """逐行乘以分母的最小公倍数，返回整数行与总放大倍数"""
    rows = []
    scale = 1
    for row in M.rows():
        multiplier = math.lcm(*(getattr(x, "denominator", 1) for x in row)) if row else 1
        rows.append([int(x * multiplier) for x in row])
        scale *= multiplier
    return rows, scale


@lru_cache(maxsize=32)
def _signed_arrangements(values: Tuple[int, ...]) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    return tuple((images, parity_sign(images)) for images in itertools.permutations(values))


def leibniz_det(M: Matrix, limit: Optional[int] = None) -> ExactScalar:
    """按置换求和的定义式，阶乘代价，受规模上限保护"""
    _require_square(M, "leibniz_det")
    limit = config.LEIBNIZ_LIMIT if limit is None else limit
    n = M.n_rows
    if n > limit:
        raise SizeGuardException(
            f"leibniz_det is limited to n ≤ {limit}, got n={n}",
            details={"n": n, "limit": limit},
        )
    rows = M.rows()
    total: ExactScalar = 0
    for images, sign in _signed_arrangements(tuple(range(n))):
        total += sign * math.prod(rows[i][images[i]] for i in range(n))
    return normalize_scalar(total)


def _bareiss_int(a: List[List[int]]) -> int:
    n = len(a)
    if n == 0:
        return 1
    a = [row[:] for row in a]
    sign = 1
    previous = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        row_k = a[k]
        for i in range(k + 1, n):
            row_i = a[i]
            factor = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = exact_div(row_i[j] * pivot - factor * row_k[j], previous, require_integral=True)
            row_i[k] = 0
        previous = pivot
    return sign * a[n - 1][n - 1]


def bareiss_det(M: Matrix) -> ExactScalar:
    """无分数消元，换行变号；整数输入下每次除法都整除"""
    _require_square(M, "bareiss_det")
    rows, scale = _integer_rows(M)
    return exact_div(_bareiss_int(rows), scale)


def _step(current: List[List], previous: List[List], divisor_layer: Optional[int]) -> List[List]:
    size = len(current) - 1
    for i in range(size):
        for j in range(size):
            if previous[i + 1][j + 1] == 0:
                raise ZeroDivisorException(
                    f"Vanishing divisor at ({i + 1},{j + 1}) of layer {divisor_layer}",
                    layer=divisor_layer,
                    position=(i + 1, j + 1),
                )
    return [
        [
            exact_div(
                current[i][j] * current[i + 1][j + 1] - current[i][j + 1] * current[i + 1][j],
                previous[i + 1][j + 1],
                require_integral=True,
            )
            for j in range(size)
        ]
        for i in range(size)
    ]


def condensation_step(current: Matrix, previous_interior: Matrix, divisor_layer: Optional[int] = None) -> Matrix:
    """
    凝聚一步：由当前层和上一层算出下一层

    Args:
        current: m×m 的当前层
        previous_interior: (m+1)×(m+1) 的上一层，只用到其内部元素作除数
        divisor_layer: 上一层的子式阶数，仅用于报错信息

    Raises:
        ZeroDivisorException: 某个用到的除数为零，position 为其在上一层中的 (行, 列)
    """
    _require_square(current, "condensation_step")
    _require_square(previous_interior, "condensation_step")
    if previous_interior.n_rows != current.n_rows + 1:
        raise MatrixException(
            f"Previous layer must be {current.n_rows + 1}x{current.n_rows + 1}, "
            f"got {previous_interior.n_rows}x{previous_interior.n_cols}",
            ErrorCode.MATRIX_DIMENSION_ERROR,
        )
    return Matrix.from_rows(_step(current.rows(), previous_interior.rows(), divisor_layer))


def _condense(rows: List[List[int]]) -> List[List[List[int]]]:
    n = len(rows)
    layers = [rows]
    previous = [[1] * (n + 1) for _ in range(n + 1)]
    current = rows
    for k in range(1, n):
        # current 为第 k 层，previous 为第 k-1 层
        following = _step(current, previous, k - 1)
        layers.append(following)
        previous, current = current, following
    return layers


def _repair(working: List[List[int]], error: ZeroDivisorException, rng: random.Random, retry: int) -> RowRepair:
    """把窗口外的一行的 t 倍加到消失子式窗口内的一行上"""
    k = error.layer
    top, _ = error.position
    window = range(top, top + k)
    outside = [r for r in range(len(working)) if r not in window]
    target = rng.choice(list(window))
    source = rng.choice(outside)
    factor = rng.choice((-3, -2, -1, 1, 2, 3))
    working[target] = [x + factor * y for x, y in zip(working[target], working[source])]
    return RowRepair(retry, target + 1, source + 1, factor, k, tuple(error.position))


def condensation_det(M: Matrix, retries: Optional[int] = None, seed: Optional[int] = None
                     ) -> Tuple[ExactScalar, CondensationTrace]:
    """
    凝聚法求行列式

    遇到为零的除数时，做随机的保行列式行变换后重新开始；累计 retries 次修复仍失败，
    则回退到 Bareiss 消元并在 trace 中标记。结果恒等于 bareiss_det(M)。
    """
    _require_square(M, "condensation_det")
    retries = config.REPAIR_RETRIES if retries is None else retries
    seed = config.SEED if seed is None else seed
    n = M.n_rows
    if n == 0:
        return 1, CondensationTrace(layers=())
    if n == 1:
        return M.entry(0, 0), CondensationTrace(layers=(M,))

    rows, scale = _integer_rows(M)
    working = [row[:] for row in rows]
    rng = random.Random(seed)
    repairs: List[RowRepair] = []

    for attempt in range(retries + 1):
        try:
            layers = _condense(working)
        except ZeroDivisorException as e:
            if attempt == retries:
                break
            repair = _repair(working, e, rng, attempt + 1)
            repairs.append(repair)
            logger.log_repair(repair.retry, repair.target_row, repair.source_row, repair.factor,
                              repair.divisor_layer, repair.position)
            continue
        trace = CondensationTrace(
            layers=tuple(Matrix.from_rows(layer) for layer in layers),
            repairs=tuple(repairs),
            scale=scale,
        )
        return exact_div(layers[-1][0][0], scale), trace

    logger.log_fallback(n, len(repairs))
    value = _bareiss_int(rows)
    return exact_div(value, scale), CondensationTrace(layers=(), repairs=tuple(repairs),
                                                      fallback_used=True, scale=scale)


def evaluate_det(M: Matrix, method: DetMethod = "condensation", retries: Optional[int] = None,
                 seed: Optional[int] = None) -> DetResult:
    """按方法名分派"""
    if method == "condensation":
        value, trace = condensation_det(M, retries=retries, seed=seed)
        return DetResult(value, method, trace)
    if method == "bareiss":
        return DetResult(bareiss_det(M), method)
    if method == "leibniz":
        return DetResult(leibniz_det(M), method)
    raise ParseException(f"Unknown method {method!r}; expected one of {', '.join(METHODS)}",
                         ErrorCode.PARSE_ERROR)


def _check_range(span: range, bound: int, label: str) -> None:
    if span.step != 1:
        raise MatrixException(f"{label} must be contiguous", ErrorCode.MATRIX_DIMENSION_ERROR)
    if len(span) and (span.start < 1 or span.stop - 1 > bound):
        raise MatrixException(
            f"{label} {span.start}..{span.stop - 1} outside 1..{bound}",
            ErrorCode.MATRIX_DIMENSION_ERROR,
        )


def minor_det(M: Matrix, rows: range, cols: range, method: DetMethod = "bareiss") -> ExactScalar:
    """连续子矩阵的行列式；行列号 1 起，例如 range(1, 3) 表示第 1..2 行；空区间为 1"""
    if len(rows) != len(cols):
        raise MatrixException(
            f"Row and column selections differ in length ({len(rows)} vs {len(cols)})",
            ErrorCode.MATRIX_DIMENSION_ERROR,
        )
    _check_range(rows, M.n_rows, "rows")
    _check_range(cols, M.n_cols, "cols")
    if not rows:
        return 1
    sub = M.submatrix(range(rows.start - 1, rows.stop - 1), range(cols.start - 1, cols.stop - 1))
    return evaluate_det(sub, method).value


def det_poly(rows: Iterable[int], cols: Iterable[int], limit: Optional[int] = None) -> FormalPoly:
    """符号行列式：对 rows -> cols 的全部双射求 sign·单项式之和，符号按保序重编号计算"""
    rows = tuple(sorted(rows))
    cols = tuple(sorted(cols))
    limit = config.DET_POLY_LIMIT if limit is None else limit
    if len(rows) != len(cols):
        raise MatrixException("det_poly needs index sets of equal size", ErrorCode.MATRIX_DIMENSION_ERROR)
    if len(rows) > limit:
        raise SizeGuardException(
            f"det_poly is limited to size ≤ {limit}, got {len(rows)}",
            details={"size": len(rows), "limit": limit},
        )
    return poly_from_terms(
        (sign, tuple(zip(rows, images))) for images, sign in _signed_arrangements(cols)
    )


MatrixKind = Literal["random", "vandermonde", "singular-interior"]
MATRIX_KINDS: Tuple[str, ...] = ("random", "vandermonde", "singular-interior")


def gen_matrix(kind: MatrixKind, n: int, bound: int = 9, seed: int = 0,
               nodes: Optional[Sequence[int]] = None) -> Matrix:
    """
    生成测试 / 基准矩阵，给定种子时结果确定

    singular-interior: n ≥ 4 时在中央放一个行成比例的 2×2 连续块，使该 2×2 子式为零；
    其余元素均非零。n = 3 时把中心元素置零；n ≤ 2 没有内部除数，只得到非零随机矩阵。
    """
    if n < 1:
        raise SizeGuardException(f"gen_matrix needs n ≥ 1, got {n}", details={"n": n})
    rng = random.Random(f"{kind}:{n}:{seed}")

    if kind == "vandermonde":
        xs = list(nodes) if nodes is not None else list(range(1, n + 1))
        if len(xs) != n:
            raise MatrixException("Need exactly n Vandermonde nodes", ErrorCode.MATRIX_DIMENSION_ERROR)
        return Matrix.from_rows([[x ** j for j in range(n)] for x in xs])

    if kind not in ("random", "singular-interior"):
        raise ParseException(f"Unknown matrix kind {kind!r}", ErrorCode.PARSE_ERROR)

    if kind == "random":
        return Matrix.from_rows([[rng.randint(-bound, bound) for _ in range(n)] for _ in range(n)])

    # 非零元素保证第 1 层（矩阵元本身）的除数不会先于植入的 2×2 子式消失
    magnitude = max(bound, 1)
    rows = [[rng.choice((-1, 1)) * rng.randint(1, magnitude) for _ in range(n)] for _ in range(n)]
    if n == 3:
        rows[1][1] = 0
    elif n >= 4:
        c = (n - 2) // 2
        factor = rng.choice((-2, -1, 1, 2))
        rows[c + 1][c] = factor * rows[c][c]
        rows[c + 1][c + 1] = factor * rows[c][c + 1]
    return Matrix.from_rows(rows)


def parse_matrix_text(text: str) -> Matrix:
    """'#' 开头为注释行；每行一行矩阵，元素以空白分隔，可为带符号整数或 p/q"""
    rows = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            rows.append([to_scalar(token) for token in stripped.split()])
        except ParseException as e:
            raise ParseException(f"Line {line_number}: {e.message}", ErrorCode.PARSE_ERROR,
                                 details={"line": line_number})
    if not rows:
        raise ParseException("Matrix text contains no rows", ErrorCode.PARSE_ERROR)
    if any(len(row) != len(rows[0]) for row in rows):
        raise ParseException("Matrix rows have different lengths", ErrorCode.PARSE_ERROR,
                             details={"row_lengths": [len(row) for row in rows]})
    return Matrix.from_rows(rows)


def format_matrix_text(M: Matrix) -> str:
    return "\n".join(" ".join(format_scalar(x) for x in row) for row in M.rows()) + "\n"


def condensation_trace_to_json(trace: CondensationTrace, determinant: ExactScalar) -> dict:
    return {
        "determinant": format_scalar(determinant),
        "scale": str(trace.scale),
        "fallback_used": trace.fallback_used,
        "repairs": [
            {
                "retry": r.retry,
                "target_row": r.target_row,
                "source_row": r.source_row,
                "factor": r.factor,
                "divisor_layer": r.divisor_layer,
                "position": list(r.position),
            }
            for r in trace.repairs
        ],
        "layers": [[[format_scalar(x) for x in row] for row in layer.rows()] for layer in trace.layers],
    }
