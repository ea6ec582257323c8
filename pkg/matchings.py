"""
置换与配对
带符号的置换、三类配对 A(n)、B(n)、C(n) 的枚举与形式权重。

男士 1..n，女士 1..n（文中带撇号，这里省略）。π 是婚姻，σ 是婚外情：

    类别   π 的定义域 -> 值域        σ 的定义域 -> 值域
    A      {1..n}   -> {1..n}        {2..n-1} -> {2..n-1}
    B      {1..n-1} -> {1..n-1}      {2..n}   -> {2..n}
    C      {1..n-1} -> {2..n}        {2..n}   -> {1..n-1}

不同下标集之间的置换，其符号按两侧各自保序重新编号为 1..k 后的奇偶性计算。
"""
import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterator, List, Literal, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from exceptions import ErrorCode, PairingException, SizeGuardException, handle_exception
from scalars import FormalPoly, Monomial, merge_monomials


class PairingClass(Enum):
    A = "A"
    B = "B"
    C = "C"


def _span(lo: int, hi: int) -> Tuple[int, ...]:
    return tuple(range(lo, hi + 1))


def class_layout(n: int, pairing_class: PairingClass) -> Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]:
    """返回 ((π 定义域, π 值域), (σ 定义域, σ 值域))"""
    if pairing_class is PairingClass.A:
        return (_span(1, n), _span(1, n)), (_span(2, n - 1), _span(2, n - 1))
    if pairing_class is PairingClass.B:
        return (_span(1, n - 1), _span(1, n - 1)), (_span(2, n), _span(2, n))
    return (_span(1, n - 1), _span(2, n)), (_span(2, n), _span(1, n - 1))


# 校验信息里使用的符号化区间
_LAYOUT_LABELS = {
    PairingClass.A: (("{1..n}", "{1..n}"), ("{2..n−1}", "{2..n−1}")),
    PairingClass.B: (("{1..n−1}", "{1..n−1}"), ("{2..n}", "{2..n}")),
    PairingClass.C: (("{1..n−1}", "{2..n}"), ("{2..n}", "{1..n−1}")),
}


def parity_sign(images: Sequence[int]) -> int:
    """按保序重编号后的置换奇偶性；空序列为 +1"""
    ranks = {value: rank for rank, value in enumerate(sorted(images))}
    relabeled = [ranks[value] for value in images]
    seen = [False] * len(relabeled)
    transpositions = 0
    for start in range(len(relabeled)):
        if seen[start]:
            continue
        length = 0
        position = start
        while not seen[position]:
            seen[position] = True
            position = relabeled[position]
            length += 1
        transpositions += length - 1
    return -1 if transpositions % 2 else 1


@dataclass(frozen=True)
class Permutation:
    """两个等大整数集之间的双射，按男士编号排序存放"""
    pairs: Tuple[Tuple[int, int], ...]
    _forward: Dict[int, int] = field(default=None, init=False, repr=False, compare=False, hash=False)
    _backward: Dict[int, int] = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(sorted((man, woman) for man, woman in self.pairs)))
        forward = dict(self.pairs)
        backward = {woman: man for man, woman in self.pairs}
        if len(forward) != len(self.pairs) or len(backward) != len(self.pairs):
            raise PairingException("Permutation is not a bijection", ErrorCode.PAIRING_INVALID,
                                   violations=["mapping not injective"])
        object.__setattr__(self, "_forward", forward)
        object.__setattr__(self, "_backward", backward)

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> "Permutation":
        return cls(tuple(sorted((int(m), int(w)) for m, w in mapping.items())))

    @classmethod
    def from_images(cls, domain: Sequence[int], images: Sequence[int]) -> "Permutation":
        return cls(tuple(zip(domain, images)))

    @property
    def domain(self) -> Tuple[int, ...]:
        return tuple(man for man, _ in self.pairs)

    @property
    def codomain(self) -> Tuple[int, ...]:
        return tuple(sorted(woman for _, woman in self.pairs))

    @property
    def images(self) -> Tuple[int, ...]:
        return tuple(woman for _, woman in self.pairs)

    def __call__(self, man: int) -> int:
        return self._forward[man]

    def __len__(self) -> int:
        return len(self.pairs)

    def get(self, man: int) -> Optional[int]:
        return self._forward.get(man)

    def inverse_lookup(self, woman: int) -> Optional[int]:
        return self._backward.get(woman)

    def as_dict(self) -> Dict[int, int]:
        return dict(self._forward)

    def compose(self, other: "Permutation") -> "Permutation":
        """(self ∘ other)(i) = self(other(i))，要求 other 的值域等于 self 的定义域"""
        if other.codomain != self.domain:
            raise PairingException("Cannot compose permutations with mismatched sets",
                                   ErrorCode.PAIRING_INVALID)
        return Permutation(tuple((man, self(woman)) for man, woman in other.pairs))

    def cells(self) -> Monomial:
        return self.pairs


def perm_sign(p: Permutation) -> int:
    return parity_sign(p.images)


@dataclass(frozen=True)
class Pairing:
    """[π, σ]：婚姻与婚外情，连同类别和规模"""
    n: int
    pairing_class: PairingClass
    marriages: Permutation
    affairs: Permutation

    def lover_of(self, woman: int) -> Optional[int]:
        return self.affairs.inverse_lookup(woman)

    def wife_of(self, man: int) -> Optional[int]:
        return self.marriages.get(man)


@dataclass(frozen=True)
class FormalWeight:
    sign: int
    cells: Monomial

    def as_poly(self) -> FormalPoly:
        return FormalPoly.monomial(self.cells, self.sign)

    def __neg__(self) -> "FormalWeight":
        return FormalWeight(-self.sign, self.cells)


def pairing_weight(p: Pairing) -> FormalWeight:
    """sign(π)·sign(σ)，C 类再取一次负号；格子为两层关系的多重集并"""
    sign = perm_sign(p.marriages) * perm_sign(p.affairs)
    if p.pairing_class is PairingClass.C:
        sign = -sign
    return FormalWeight(sign, merge_monomials(p.marriages.cells(), p.affairs.cells()))


@lru_cache(maxsize=64)
def _arrangements(values: Tuple[int, ...]) -> Tuple[Tuple[int, ...], ...]:
    return tuple(itertools.permutations(values))


def _check_size(n: int) -> None:
    if n < 2:
        raise SizeGuardException(f"n must be ≥ 2, got {n}", details={"n": n})


def enumerate_class(n: int, pairing_class: PairingClass, pi_prefix: Sequence[int] = ()) -> Iterator[Pairing]:
    """
    按 π 再按 σ 的字典序逐个产出该类的全部配对，每个恰好一次

    Args:
        n: 规模，至少为 2
        pairing_class: A / B / C
        pi_prefix: 固定 π 在前若干位男士上的取值，用于把枚举空间分片
    """
    _check_size(n)
    (pi_domain, pi_codomain), (sigma_domain, sigma_codomain) = class_layout(n, pairing_class)
    prefix = tuple(pi_prefix)
    if len(set(prefix)) != len(prefix) or not set(prefix) <= set(pi_codomain) or len(prefix) > len(pi_domain):
        raise PairingException(f"Invalid marriage prefix {prefix}", ErrorCode.PAIRING_INVALID,
                               violations=["prefix is not a partial injection into the marriage codomain"])

    affairs = [Permutation.from_images(sigma_domain, images) for images in _arrangements(sigma_codomain)]
    remaining = tuple(w for w in pi_codomain if w not in prefix)
    for tail in _arrangements(remaining):
        marriages = Permutation.from_images(pi_domain, prefix + tail)
        for affair in affairs:
            yield Pairing(n, pairing_class, marriages, affair)


class PairingPayload(BaseModel):
    """配对 JSON 的结构校验；键为 1 起的编号"""
    model_config = ConfigDict(populate_by_name=True)

    n: int
    pairing_class: Literal["A", "B", "C"] = Field(alias="class")
    marriages: Dict[int, int]
    affairs: Dict[int, int] = Field(default_factory=dict)


def _mapping_violations(label: str, mapping: Dict[int, int], domain: Tuple[int, ...], codomain: Tuple[int, ...],
                        domain_label: str, codomain_label: str) -> List[str]:
    violations = []
    if set(mapping) != set(domain):
        violations.append(f"{label} domain must be {domain_label}")
    images = list(mapping.values())
    if len(set(images)) != len(images):
        violations.append(f"{label}s not injective")
    elif set(images) != set(codomain):
        violations.append(f"{label} codomain must be {codomain_label}")
    return violations


def check_pairing(raw) -> Tuple[Optional[Pairing], List[str]]:
    """校验原始配对数据，返回 (配对或 None, 违规列表)"""
    try:
        payload = raw if isinstance(raw, PairingPayload) else PairingPayload.model_validate(raw)
    except ValidationError as e:
        wrapped = handle_exception(e, "check_pairing")
        return None, wrapped.violations or ["malformed pairing payload"]

    if payload.n < 2:
        return None, [f"n must be ≥ 2, got {payload.n}"]

    pairing_class = PairingClass(payload.pairing_class)
    (pi_domain, pi_codomain), (sigma_domain, sigma_codomain) = class_layout(payload.n, pairing_class)
    (pi_dom_label, pi_cod_label), (sigma_dom_label, sigma_cod_label) = _LAYOUT_LABELS[pairing_class]
    violations = _mapping_violations("marriage", payload.marriages, pi_domain, pi_codomain,
                                     pi_dom_label, pi_cod_label)
    violations += _mapping_violations("affair", payload.affairs, sigma_domain, sigma_codomain,
                                      sigma_dom_label, sigma_cod_label)
    if violations:
        return None, violations

    pairing = Pairing(
        payload.n,
        pairing_class,
        Permutation.from_mapping(payload.marriages),
        Permutation.from_mapping(payload.affairs),
    )
    return pairing, []


def validate_pairing(raw) -> Pairing:
    """校验通过返回 Pairing，否则抛出带违规列表的 PairingException"""
    pairing, violations = check_pairing(raw)
    if pairing is None:
        raise PairingException(
            f"Invalid pairing: {'; '.join(violations)}",
            ErrorCode.PAIRING_INVALID,
            violations=violations,
        )
    return pairing


def pairing_to_json(p: Pairing) -> dict:
    return {
        "n": p.n,
        "class": p.pairing_class.value,
        "marriages": {str(man): woman for man, woman in p.marriages.pairs},
        "affairs": {str(man): woman for man, woman in p.affairs.pairs},
    }


def pairing_from_json(data: dict) -> Pairing:
    return validate_pairing(data)


def weight_to_json(w: FormalWeight) -> dict:
    return {"sign": w.sign, "cells": [[row, col] for row, col in w.cells]}
