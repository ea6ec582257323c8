"""
精确算术
整数与有理数标量、以矩阵元 a_{i,j} 为未定元的整系数形式多项式，
为双射证明引擎和行列式引擎提供共同的算术基础。所有值构造后不可变。
"""
import heapq
import math
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, List, Literal, Mapping, Protocol, Tuple, Union

from exceptions import (
    ErrorCode, InternalConsistencyException, MatrixException, ParseException, ZeroDivisorException
)

# 分母为 1 的有理数一律化为 int；Fraction 构造时即为既约、分母为正
ExactScalar = Union[int, Fraction]

# (行, 列)，1 起
Cell = Tuple[int, int]

# 按 (行, 列) 字典序排好的多重集
Monomial = Tuple[Cell, ...]


class MatrixLike(Protocol):
    n_rows: int
    n_cols: int

    def entry(self, i: int, j: int) -> ExactScalar:
        ...


def normalize_scalar(value: ExactScalar) -> ExactScalar:
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


def to_scalar(value: Union[int, Fraction, str]) -> ExactScalar:
    """把 int、Fraction 或 "p/q" 形式的字符串转成精确标量；拒绝浮点数"""
    if isinstance(value, bool) or isinstance(value, float):
        raise ParseException(f"Not an exact scalar: {value!r}", ErrorCode.PARSE_ERROR)
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return normalize_scalar(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, den = text.split("/")
                if int(den) == 0:
                    raise ZeroDivisorException(f"Zero denominator in {value!r}")
                return normalize_scalar(Fraction(int(num), int(den)))
            return int(text)
        except ValueError:
            raise ParseException(f"Not an integer or p/q rational: {value!r}", ErrorCode.PARSE_ERROR)
    raise ParseException(f"Unsupported scalar type: {type(value).__name__}", ErrorCode.PARSE_ERROR)


def format_scalar(value: ExactScalar) -> str:
    value = normalize_scalar(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return str(value)


def exact_div(a: ExactScalar, b: ExactScalar, require_integral: bool = False) -> ExactScalar:
    """
    精确除法

    Args:
        a: 被除数
        b: 除数，不能为零
        require_integral: 调用方断言商为整数（凝聚 / Bareiss 场景）

    Raises:
        ZeroDivisorException: b == 0
        InternalConsistencyException: 断言整除但实际不整除
    """
    if b == 0:
        raise ZeroDivisorException(f"Division of {format_scalar(a)} by zero")
    if isinstance(a, int) and isinstance(b, int):
        quotient, remainder = divmod(a, b)
        if remainder == 0:
            return quotient
        if require_integral:
            raise InternalConsistencyException(
                f"Inexact division {a} / {b} where an integer quotient is required",
                ErrorCode.INTERNAL_CONSISTENCY,
                details={"dividend": str(a), "divisor": str(b)},
            )
        return Fraction(a, b)
    return normalize_scalar(Fraction(a) / Fraction(b))


def make_monomial(cells: Iterable[Cell]) -> Monomial:
    """校验并规范化一组矩阵元"""
    canonical = []
    for cell in cells:
        row, col = cell
        if not (isinstance(row, int) and isinstance(col, int)) or row < 1 or col < 1:
            raise ParseException(f"Cell indices must be positive integers, got {cell!r}", ErrorCode.PARSE_ERROR)
        canonical.append((row, col))
    return tuple(sorted(canonical))


def merge_monomials(left: Monomial, right: Monomial) -> Monomial:
    """多重集并；两边都已规范，归并即可"""
    return tuple(heapq.merge(left, right))


class FormalPoly:
    """单项式到非零整系数的映射；相等即映射相等"""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, int] = None):
        clean: Dict[Monomial, int] = {}
        for monomial, coeff in (terms or {}).items():
            if coeff:
                key = make_monomial(monomial)
                clean[key] = clean.get(key, 0) + int(coeff)
        self._terms = MappingProxyType({m: c for m, c in clean.items() if c})

    @classmethod
    def _trusted(cls, terms: Dict[Monomial, int]) -> "FormalPoly":
        # 调用方保证键已规范、系数非零
        poly = cls.__new__(cls)
        poly._terms = MappingProxyType(terms)
        return poly

    @classmethod
    def monomial(cls, cells: Iterable[Cell], coeff: int = 1) -> "FormalPoly":
        return cls({make_monomial(cells): coeff})

    @property
    def terms(self) -> Mapping[Monomial, int]:
        return self._terms

    def degree(self) -> int:
        return max((len(m) for m in self._terms), default=0)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalPoly):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __add__(self, other: "FormalPoly") -> "FormalPoly":
        return poly_combine(self, other, "add")

    def __sub__(self, other: "FormalPoly") -> "FormalPoly":
        return poly_combine(self, other, "subtract")

    def __neg__(self) -> "FormalPoly":
        return FormalPoly._trusted({m: -c for m, c in self._terms.items()})

    def __mul__(self, other: "FormalPoly") -> "FormalPoly":
        return poly_mul(self, other)

    def __repr__(self) -> str:
        if not self._terms:
            return "FormalPoly(0)"
        parts = []
        for monomial in sorted(self._terms):
            cells = "*".join(f"a{i},{j}" for i, j in monomial) or "1"
            parts.append(f"{self._terms[monomial]:+d}*{cells}")
        return f"FormalPoly({' '.join(parts)})"


def poly_combine(p: FormalPoly, q: FormalPoly, op: Literal["add", "subtract"]) -> FormalPoly:
    """逐系数相加或相减，去掉零系数"""
    if op not in ("add", "subtract"):
        raise ValueError(f"Unknown combination {op!r}")
    factor = 1 if op == "add" else -1
    result = dict(p.terms)
    for monomial, coeff in q.terms.items():
        value = result.get(monomial, 0) + factor * coeff
        if value:
            result[monomial] = value
        else:
            result.pop(monomial, None)
    return FormalPoly._trusted(result)


def poly_mul(p: FormalPoly, q: FormalPoly) -> FormalPoly:
    """分配律乘积；单项式合并为多重集并"""
    result: Dict[Monomial, int] = {}
    for left, left_coeff in p.terms.items():
        for right, right_coeff in q.terms.items():
            key = merge_monomials(left, right)
            result[key] = result.get(key, 0) + left_coeff * right_coeff
    return FormalPoly._trusted({m: c for m, c in result.items() if c})


def poly_from_terms(signed_monomials: Iterable[Tuple[int, Monomial]]) -> FormalPoly:
    """把 (系数, 规范单项式) 流累加成多项式；枚举求和走这条路径"""
    result: Dict[Monomial, int] = {}
    for coeff, monomial in signed_monomials:
        result[monomial] = result.get(monomial, 0) + coeff
    return FormalPoly._trusted({m: c for m, c in result.items() if c})


def poly_eval(p: FormalPoly, matrix: MatrixLike) -> ExactScalar:
    """代入 a_{i,j} := M[i,j]（1 起），精确求值"""
    for monomial in p.terms:
        for row, col in monomial:
            if row > matrix.n_rows or col > matrix.n_cols:
                raise MatrixException(
                    f"Cell ({row},{col}) outside a {matrix.n_rows}x{matrix.n_cols} matrix",
                    ErrorCode.MATRIX_DIMENSION_ERROR,
                    details={"cell": [row, col]},
                )
    total: ExactScalar = 0
    for monomial, coeff in p.terms.items():
        total += coeff * math.prod(matrix.entry(row - 1, col - 1) for row, col in monomial)
    return normalize_scalar(total)


def poly_to_json(p: FormalPoly) -> List[dict]:
    """按规范顺序序列化；系数用十进制字符串保证大整数无损"""
    return [
        {"cells": [[row, col] for row, col in monomial], "coeff": str(p.terms[monomial])}
        for monomial in sorted(p.terms)
    ]


def poly_from_json(data: List[dict]) -> FormalPoly:
    try:
        return FormalPoly({
            make_monomial(tuple(cell) for cell in item["cells"]): int(item["coeff"])
            for item in data
        })
    except (KeyError, TypeError, ValueError) as e:
        raise ParseException(f"Malformed polynomial JSON: {e}", ErrorCode.PARSE_ERROR)
