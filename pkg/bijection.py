"""
双射证明引擎
链条追踪、映射 T 及其逆、好/坏元素的判定、对合 S，以及通过枚举对恒等式

    det(M)·det(内部) = det(左上)·det(右下) − det(右上)·det(左下)

做形式与数值两种验证。
"""
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterable, List, Literal, Optional, Tuple

from config import config
from exceptions import (
    BijectionException, ErrorCode, InternalConsistencyException, MatrixException, PairingException,
    SizeGuardException
)
from logging_config import logger
from matchings import (
    Pairing, PairingClass, Permutation, class_layout, enumerate_class, pairing_to_json,
    pairing_weight, weight_to_json
)
from condensation import Matrix, bareiss_det, det_poly, minor_det
from scalars import ExactScalar, FormalPoly, Monomial, format_scalar, poly_eval, poly_from_terms

Direction = Literal["forward", "reverse"]


@dataclass(frozen=True)
class Chain:
    """
    男女交替的链条

    正向（T）：men[0] = n，women[i] = π(men[i])，men[i+1] = σ⁻¹(women[i])，
    terminal 为到达的无情人女士（1 或 n），men 与 women 等长。

    反向（判定 / T⁻¹ / S）：women[0] 为起点女士，men[i] = σ⁻¹(women[i])，
    women[i+1] = π(men[i])。好元素的链以 men[-1] = n 结束，terminal 为起点女士；
    坏元素的链停在另一位无情人女士上，women 比 men 多一个，terminal 为该女士。
    """
    men: Tuple[int, ...]
    women: Tuple[int, ...]
    terminal: int
    direction: Direction = "forward"

    @property
    def length(self) -> int:
        return len(self.men)


class Verdict(Enum):
    GOOD = "Good"
    BAD = "Bad"


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    chain: Chain

    @property
    def good(self) -> bool:
        return self.verdict is Verdict.GOOD


def _require_class(p: Pairing, allowed: Tuple[PairingClass, ...], operation: str) -> None:
    if p.pairing_class not in allowed:
        raise PairingException(
            f"{operation} expects class {'/'.join(c.value for c in allowed)}, got {p.pairing_class.value}",
            ErrorCode.PAIRING_WRONG_CLASS,
            violations=[f"wrong class {p.pairing_class.value}"],
        )


class _Visits:
    """链条中任何人都不能出现两次"""

    def __init__(self):
        self.men = set()
        self.women = set()

    def man(self, who: int) -> None:
        if who in self.men:
            raise InternalConsistencyException(f"Chain revisits man {who}", ErrorCode.INTERNAL_CONSISTENCY)
        self.men.add(who)

    def woman(self, who: int) -> None:
        if who in self.women:
            raise InternalConsistencyException(f"Chain revisits woman {who}", ErrorCode.INTERNAL_CONSISTENCY)
        self.women.add(who)


def chain_forward(p: Pairing) -> Chain:
    """从 n 号男士出发，妻子、情人交替，直到 1 号或 n 号女士（她们没有情人）"""
    _require_class(p, (PairingClass.A,), "chain_forward")
    n = p.n
    visits = _Visits()
    men: List[int] = []
    women: List[int] = []
    man = n
    while True:
        visits.man(man)
        men.append(man)
        woman = p.wife_of(man)
        visits.woman(woman)
        women.append(woman)
        if woman in (1, n):
            return Chain(tuple(men), tuple(women), woman, "forward")
        man = p.lover_of(woman)
        if man is None:
            raise InternalConsistencyException(f"Woman {woman} has no lover", ErrorCode.INTERNAL_CONSISTENCY)


def chain_reverse(p: Pairing) -> Chain:
    """B 类从 n 号女士、C 类从 1 号女士出发，情人、妻子交替"""
    _require_class(p, (PairingClass.B, PairingClass.C), "chain_reverse")
    n = p.n
    start, dead_end = (n, 1) if p.pairing_class is PairingClass.B else (1, n)
    visits = _Visits()
    visits.woman(start)
    men: List[int] = []
    women: List[int] = [start]
    woman = start
    while True:
        man = p.lover_of(woman)
        if man is None:
            raise InternalConsistencyException(f"Woman {woman} has no lover", ErrorCode.INTERNAL_CONSISTENCY)
        visits.man(man)
        men.append(man)
        if man == n:
            return Chain(tuple(men), tuple(women), start, "reverse")
        woman = p.wife_of(man)
        visits.woman(woman)
        women.append(woman)
        if woman == dead_end:
            return Chain(tuple(men), tuple(women), dead_end, "reverse")


def _toggle(p: Pairing, to_affairs: Iterable[Tuple[int, int]], to_marriages: Iterable[Tuple[int, int]],
            new_class: PairingClass) -> Pairing:
    """把指定的婚姻改为婚外情、婚外情改为婚姻，并检查结果符合新类别"""
    marriages = p.marriages.as_dict()
    affairs = p.affairs.as_dict()
    to_affairs = list(to_affairs)
    to_marriages = list(to_marriages)
    for man, woman in to_affairs:
        if marriages.pop(man, None) != woman:
            raise InternalConsistencyException(f"({man},{woman}) is not a marriage", ErrorCode.INTERNAL_CONSISTENCY)
    for man, woman in to_marriages:
        if affairs.pop(man, None) != woman:
            raise InternalConsistencyException(f"({man},{woman}) is not an affair", ErrorCode.INTERNAL_CONSISTENCY)
    for man, woman in to_affairs:
        affairs[man] = woman
    for man, woman in to_marriages:
        marriages[man] = woman

    result = Pairing(p.n, new_class, Permutation.from_mapping(marriages), Permutation.from_mapping(affairs))
    (pi_domain, pi_codomain), (sigma_domain, sigma_codomain) = class_layout(p.n, new_class)
    if (result.marriages.domain, result.marriages.codomain, result.affairs.domain, result.affairs.codomain) != (
            pi_domain, pi_codomain, sigma_domain, sigma_codomain):
        raise InternalConsistencyException(
            f"Toggle produced a pairing outside class {new_class.value}",
            ErrorCode.INTERNAL_CONSISTENCY,
        )
    return result


def map_T(p: Pairing) -> Tuple[Pairing, Chain]:
    """
    沿正向链条：(m_i, w_i) 由婚姻改为婚外情，(m_{i+1}, w_i) 由婚外情改为婚姻。
    终点为 n 号女士时落入 B 类，为 1 号女士时落入 C 类。
    """
    chain = chain_forward(p)
    new_class = PairingClass.C if chain.terminal == 1 else PairingClass.B
    result = _toggle(
        p,
        to_affairs=zip(chain.men, chain.women),
        to_marriages=zip(chain.men[1:], chain.women[:-1]),
        new_class=new_class,
    )
    return result, chain


def classify(p: Pairing) -> Classification:
    """反向链条走到无妻的 n 号男士为好元素（在 T 的像中），停在另一位无情人女士为坏元素"""
    chain = chain_reverse(p)
    verdict = Verdict.GOOD if chain.men[-1] == p.n and len(chain.men) == len(chain.women) else Verdict.BAD
    return Classification(verdict, chain)


def _reverse_toggle(p: Pairing, chain: Chain, new_class: PairingClass) -> Pairing:
    # 反向链条上 (men[i], women[i]) 是婚外情，(men[i], women[i+1]) 是婚姻
    return _toggle(
        p,
        to_affairs=zip(chain.men, chain.women[1:]),
        to_marriages=zip(chain.men, chain.women),
        new_class=new_class,
    )


def map_T_inverse(p: Pairing) -> Pairing:
    classification = classify(p)
    if not classification.good:
        raise BijectionException(
            "Pairing is bad: it is not in the image of T",
            ErrorCode.NOT_IN_IMAGE,
            details={"chain": chain_to_json(classification.chain)},
        )
    return _reverse_toggle(p, classification.chain, PairingClass.A)


def map_S(p: Pairing) -> Pairing:
    """沿连接 1 号与 n 号女士的死路链条互换两种关系，得到另一类中的坏元素"""
    classification = classify(p)
    if classification.good:
        raise BijectionException(
            "S is defined on bad members only; this pairing is good",
            ErrorCode.MISCLASSIFIED_INPUT,
            details={"chain": chain_to_json(classification.chain)},
        )
    opposite = PairingClass.C if p.pairing_class is PairingClass.B else PairingClass.B
    return _reverse_toggle(p, classification.chain, opposite)


def chain_to_json(chain: Chain) -> dict:
    return {"men": list(chain.men), "women": list(chain.women), "terminal": chain.terminal}


def map_trace_to_json(source: Pairing, chain: Chain, output: Pairing) -> dict:
    return {
        "input": pairing_to_json(source),
        "chain": chain_to_json(chain),
        "output": pairing_to_json(output),
        "weight_in": weight_to_json(pairing_weight(source)),
        "weight_out": weight_to_json(pairing_weight(output)),
    }


@dataclass
class ClassScan:
    """一个类别（或其分片）的扫描结果"""
    size: int = 0
    bad: int = 0
    terms: Dict[Monomial, int] = field(default_factory=dict)
    bad_terms: Dict[Monomial, int] = field(default_factory=dict)

    def merge(self, other: "ClassScan") -> "ClassScan":
        merged = ClassScan(self.size + other.size, self.bad + other.bad, dict(self.terms), dict(self.bad_terms))
        for target, source in ((merged.terms, other.terms), (merged.bad_terms, other.bad_terms)):
            for monomial, coeff in source.items():
                target[monomial] = target.get(monomial, 0) + coeff
        return merged

    def total(self) -> FormalPoly:
        return poly_from_terms((c, m) for m, c in self.terms.items())

    def bad_total(self) -> FormalPoly:
        return poly_from_terms((c, m) for m, c in self.bad_terms.items())


def _scan(n: int, class_value: str, prefix: Tuple[int, ...] = ()) -> ClassScan:
    pairing_class = PairingClass(class_value)
    scan = ClassScan()
    for pairing in enumerate_class(n, pairing_class, prefix):
        weight = pairing_weight(pairing)
        scan.size += 1
        scan.terms[weight.cells] = scan.terms.get(weight.cells, 0) + weight.sign
        if pairing_class is not PairingClass.A and not classify(pairing).good:
            scan.bad += 1
            scan.bad_terms[weight.cells] = scan.bad_terms.get(weight.cells, 0) + weight.sign
    return scan


def scan_class(n: int, pairing_class: PairingClass, workers: int = 1) -> ClassScan:
    """枚举整类；按 π 在第一位男士上的取值分片，合并满足交换律与结合律，任意分片都可以"""
    if workers <= 1:
        return _scan(n, pairing_class.value)
    (_, pi_codomain), _ = class_layout(n, pairing_class)
    prefixes = [(woman,) for woman in pi_codomain]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        shards = list(pool.map(_scan, [n] * len(prefixes), [pairing_class.value] * len(prefixes), prefixes))
    result = ClassScan()
    for shard in shards:
        result = result.merge(shard)
    return result


@dataclass
class FormalVerificationReport:
    n: int
    class_sizes: Dict[str, int]
    bad_counts: Dict[str, int]
    lhs_terms: int
    rhs_terms: int
    lhs_matches_det: bool
    rhs_matches_det: bool
    sides_equal: bool
    bad_sum_zero: bool
    good_count_matches: bool
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all((self.lhs_matches_det, self.rhs_matches_det, self.sides_equal,
                    self.bad_sum_zero, self.good_count_matches))

    def summary(self) -> str:
        sizes = " ".join(f"|{k}|={v}" for k, v in self.class_sizes.items())
        return f"n={self.n} {sizes} bad={self.bad_counts['B']}+{self.bad_counts['C']}"


def alice_det_sides(n: int) -> Tuple[FormalPoly, FormalPoly]:
    """由 Leibniz 符号行列式的乘积与差给出恒等式两边"""
    full = det_poly(range(1, n + 1), range(1, n + 1))
    interior = det_poly(range(2, n), range(2, n))
    north_west = det_poly(range(1, n), range(1, n))
    south_east = det_poly(range(2, n + 1), range(2, n + 1))
    north_east = det_poly(range(1, n), range(2, n + 1))
    south_west = det_poly(range(2, n + 1), range(1, n))
    return full * interior, north_west * south_east - north_east * south_west


def check_enumeration_bound(n: int, bound: Optional[int] = None) -> int:
    """n 必须在 2 与枚举上限之间；返回实际使用的上限"""
    bound = config.ENUM_BOUND if bound is None else bound
    if n < 2:
        raise SizeGuardException(f"n must be ≥ 2, got {n}", details={"n": n})
    if n > bound:
        raise SizeGuardException(
            f"n={n} exceeds the enumeration bound {bound}",
            details={"n": n, "bound": bound},
        )
    return bound


def verify_alice_formal(n: int, bound: Optional[int] = None, workers: Optional[int] = None) -> FormalVerificationReport:
    """
    形式验证：两边分别由枚举求和、由符号行列式乘积求得，四者必须一致；
    同时统计坏元素，并检查坏元素权重之和为零、好元素个数等于 |A(n)|
    """
    check_enumeration_bound(n, bound)
    workers = config.WORKERS if workers is None else workers
    start = time.perf_counter()

    scans = {c: scan_class(n, c, workers) for c in PairingClass}
    lhs_enum = scans[PairingClass.A].total()
    rhs_enum = scans[PairingClass.B].total() + scans[PairingClass.C].total()
    bad_sum = scans[PairingClass.B].bad_total() + scans[PairingClass.C].bad_total()
    lhs_det, rhs_det = alice_det_sides(n)

    sizes = {c.value: scans[c].size for c in PairingClass}
    bad_counts = {c.value: scans[c].bad for c in (PairingClass.B, PairingClass.C)}
    good = sizes["B"] + sizes["C"] - bad_counts["B"] - bad_counts["C"]

    report = FormalVerificationReport(
        n=n,
        class_sizes=sizes,
        bad_counts=bad_counts,
        lhs_terms=len(lhs_enum),
        rhs_terms=len(rhs_enum),
        lhs_matches_det=lhs_enum == lhs_det,
        rhs_matches_det=rhs_enum == rhs_det,
        sides_equal=lhs_enum == rhs_enum,
        bad_sum_zero=not bad_sum,
        good_count_matches=good == sizes["A"],
        elapsed=time.perf_counter() - start,
    )
    logger.log_verification("formal", n, report.passed, class_sizes=sizes, bad_counts=bad_counts,
                            execution_time=report.elapsed)
    return report


@lru_cache(maxsize=8)
def _enumerated_sides(n: int) -> Tuple[FormalPoly, FormalPoly]:
    lhs = scan_class(n, PairingClass.A).total()
    rhs = scan_class(n, PairingClass.B).total() + scan_class(n, PairingClass.C).total()
    return lhs, rhs


@dataclass
class NumericVerificationReport:
    n: int
    lhs: ExactScalar
    rhs: ExactScalar
    lhs_enumerated: Optional[ExactScalar] = None
    rhs_enumerated: Optional[ExactScalar] = None

    @property
    def crosschecked(self) -> bool:
        return self.lhs_enumerated is not None

    @property
    def passed(self) -> bool:
        if self.lhs != self.rhs:
            return False
        if self.crosschecked:
            return self.lhs_enumerated == self.lhs and self.rhs_enumerated == self.rhs
        return True

    def summary(self) -> str:
        return f"n={self.n} lhs={format_scalar(self.lhs)} rhs={format_scalar(self.rhs)}"


def verify_alice_numeric(M: Matrix, crosscheck_limit: Optional[int] = None) -> NumericVerificationReport:
    """在具体矩阵上用 Bareiss 计算恒等式两边；n 不超过 crosscheck_limit 时再用枚举权重和求值对照"""
    if not M.is_square:
        raise MatrixException(
            f"verify_alice_numeric requires a square matrix, got {M.n_rows}x{M.n_cols}",
            ErrorCode.MATRIX_NOT_SQUARE,
        )
    n = M.n_rows
    if n < 2:
        raise SizeGuardException(f"n must be ≥ 2, got {n}", details={"n": n})
    crosscheck_limit = config.CROSSCHECK_LIMIT if crosscheck_limit is None else crosscheck_limit

    lhs = bareiss_det(M) * minor_det(M, range(2, n), range(2, n))
    rhs = (minor_det(M, range(1, n), range(1, n)) * minor_det(M, range(2, n + 1), range(2, n + 1))
           - minor_det(M, range(1, n), range(2, n + 1)) * minor_det(M, range(2, n + 1), range(1, n)))
    report = NumericVerificationReport(n, lhs, rhs)

    if n <= crosscheck_limit:
        lhs_poly, rhs_poly = _enumerated_sides(n)
        report.lhs_enumerated = poly_eval(lhs_poly, M)
        report.rhs_enumerated = poly_eval(rhs_poly, M)

    if not report.passed:
        logger.log_verification("numeric", n, False, lhs=format_scalar(lhs), rhs=format_scalar(rhs))
    return report
