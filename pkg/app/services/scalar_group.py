"""
Arithmetic in F_q^*, where q is the order of the secp256k1 group.

q - 1 = h * p1 * p2 * p3 and 7 generates F_q^*, so every divisor d of q - 1 has
exactly one subgroup of order d. H is the subgroup of order h; the scanner walks
the eight cosets c_i * H, stepping by g_0, which generates H.
"""
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union
import logging

from app.core.errors import (
    BadLength,
    ConfigError,
    IndexOutOfRange,
    NonDivisor,
    OutOfRange,
    RangeOverflow,
    ZeroBase,
    ZeroKey,
)

logger = logging.getLogger(__name__)

Q = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141

H = 18051648
P1 = 107361793816595537
P2 = 174723607534414371449
P3 = 341948486974166000522343609283189

PRIMITIVE_ROOT = 7
COSET_COUNT = 8

# Exponent of 7 for each g_i.
_GENERATOR_EXPONENTS = (
    P1 * P2 * P3,
    H * P2 * P3,
    H * P1 * P3,
    H * P1 * P2,
    H * P1,
    H * P2,
    H * P3,
    H,
)

_H_FACTORS = ((2, 6), (3, 1), (149, 1), (631, 1))


@dataclass(frozen=True, slots=True)
class Scalar:
    """Canonical residue modulo q."""

    value: int

    def __post_init__(self):
        if not 0 <= self.value < Q:
            raise OutOfRange(f"scalar {self.value:#x} is not in [0, q)")

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(32, "big")

    def hex(self) -> str:
        return self.to_bytes().hex()

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class OrderFactorization:
    factors: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        primes = [prime for prime, _ in self.factors]
        if primes != sorted(set(primes)):
            raise ValueError("factorization primes must be distinct and ascending")
        if any(exponent < 1 for _, exponent in self.factors):
            raise ValueError("factorization exponents must be positive")

    @classmethod
    def of(cls, *pairs: Tuple[int, int]) -> "OrderFactorization":
        merged: Dict[int, int] = {}
        for prime, exponent in pairs:
            merged[prime] = merged.get(prime, 0) + exponent
        return cls(tuple(sorted(merged.items())))

    @property
    def product(self) -> int:
        result = 1
        for prime, exponent in self.factors:
            result *= prime ** exponent
        return result

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return " * ".join(
            str(prime) if exponent == 1 else f"{prime}^{exponent}"
            for prime, exponent in self.factors
        )


Q_MINUS_ONE = OrderFactorization.of(*_H_FACTORS, (P1, 1), (P2, 1), (P3, 1))

# Claimed |<g_i>| for i = 0..7.
_SUBGROUP_ORDERS = (
    OrderFactorization.of(*_H_FACTORS),
    OrderFactorization.of((P1, 1)),
    OrderFactorization.of((P2, 1)),
    OrderFactorization.of((P3, 1)),
    OrderFactorization.of((P2, 1), (P3, 1)),
    OrderFactorization.of((P1, 1), (P3, 1)),
    OrderFactorization.of((P1, 1), (P2, 1)),
    OrderFactorization.of((P1, 1), (P2, 1), (P3, 1)),
)


@dataclass(frozen=True)
class CosetSpec:
    index: int
    representative: Scalar
    step: Scalar
    cardinality: int = H


def scalar_from_bytes(b: bytes, as_key: bool = False) -> Scalar:
    """Parse a 32-byte big-endian scalar. Values >= q are rejected, never reduced."""
    if len(b) != 32:
        raise BadLength(f"scalar must be 32 bytes, got {len(b)}")
    value = int.from_bytes(b, "big")
    if value >= Q:
        raise OutOfRange("scalar is not below the group order")
    if as_key and value == 0:
        raise ZeroKey("zero is not a private key")
    return Scalar(value)


def scalar_from_hex(text: str, as_key: bool = True) -> Scalar:
    text = text.lower().removeprefix("0x")
    try:
        raw = bytes.fromhex(text.rjust(64, "0"))
    except ValueError as e:
        raise BadLength(f"invalid hex scalar: {e}") from e
    return scalar_from_bytes(raw, as_key=as_key)


def mod_mul(a: Scalar, b: Scalar) -> Scalar:
    return Scalar(a.value * b.value % Q)


def mod_inv(a: Scalar) -> Scalar:
    if a.value == 0:
        raise ZeroBase("zero has no inverse")
    return Scalar(pow(a.value, -1, Q))


def mod_exp(base: Union[Scalar, int], exponent: int) -> Scalar:
    value = base.value if isinstance(base, Scalar) else base % Q
    if value == 0:
        raise ZeroBase("base must be nonzero")
    if exponent < 0:
        raise ValueError("exponent must be nonnegative")
    return Scalar(pow(value, exponent, Q))


def _check_index(i: int) -> None:
    if not 0 <= i < COSET_COUNT:
        raise IndexOutOfRange(f"coset index {i} is not in [0, {COSET_COUNT - 1}]")


@lru_cache(maxsize=None)
def coset_generator(i: int) -> Scalar:
    _check_index(i)
    return mod_exp(PRIMITIVE_ROOT, _GENERATOR_EXPONENTS[i])


def subgroup_order(i: int) -> OrderFactorization:
    _check_index(i)
    return _SUBGROUP_ORDERS[i]


def verify_order(x: Scalar, claimed: OrderFactorization) -> bool:
    """True iff the multiplicative order of x is exactly claimed.product."""
    if x.value == 0:
        raise ZeroBase("zero has no multiplicative order")
    n = claimed.product
    if Q_MINUS_ONE.product % n:
        raise NonDivisor(f"{n} does not divide q - 1")
    if pow(x.value, n, Q) != 1:
        return False
    return all(pow(x.value, n // prime, Q) != 1 for prime, _ in claimed.factors)


def coset_spec(i: int) -> CosetSpec:
    _check_index(i)
    representative = Scalar(1) if i == 0 else coset_generator(i)
    return CosetSpec(index=i, representative=representative, step=coset_generator(0))


def coset_element(spec: CosetSpec, j: int) -> Scalar:
    if not 0 <= j < spec.cardinality:
        raise RangeOverflow(f"exponent {j} is not in [0, {spec.cardinality})")
    return Scalar(spec.representative.value * pow(spec.step.value, j, Q) % Q)


def coset_iter(spec: CosetSpec, start: int, count: int) -> Iterator[Tuple[int, Scalar]]:
    """Yield (j, c_i * g_0^j) for j in [start, start + count)."""
    if start < 0 or count < 0:
        raise ValueError("start and count must be nonnegative")
    if start + count > spec.cardinality:
        raise RangeOverflow(
            f"range [{start}, {start + count}) exceeds coset size {spec.cardinality}"
        )
    return _walk(spec, start, count)


def _walk(spec: CosetSpec, start: int, count: int) -> Iterator[Tuple[int, Scalar]]:
    if count == 0:
        return
    step = spec.step.value
    current = spec.representative.value * pow(step, start, Q) % Q
    for j in range(start, start + count):
        yield j, Scalar(current)
        current = current * step % Q


@lru_cache(maxsize=1)
def _baby_steps() -> Tuple[Dict[int, int], int, int]:
    m = isqrt(H) + 1
    g0 = coset_generator(0).value
    table: Dict[int, int] = {}
    current = 1
    for j in range(m):
        table.setdefault(current, j)
        current = current * g0 % Q
    giant = pow(g0, -m, Q)
    return table, m, giant


def _log_in_h(y: int) -> Optional[int]:
    table, m, giant = _baby_steps()
    gamma = y
    for i in range(m + 1):
        j = table.get(gamma)
        if j is not None:
            return (i * m + j) % H
        gamma = gamma * giant % Q
    return None


def locate_in_coset(k: Scalar) -> Optional[Tuple[int, int]]:
    """Return (coset, exponent) such that coset_element(coset_spec(i), j) == k."""
    if k.value == 0:
        return None
    for i in range(COSET_COUNT):
        y = k.value * pow(coset_spec(i).representative.value, -1, Q) % Q
        if pow(y, H, Q) != 1:
            continue
        j = _log_in_h(y)
        if j is not None:
            return i, j
    return None


def write_generator_fixture(path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [coset_generator(i).hex() for i in range(COSET_COUNT)]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    logger.info(f"Wrote {COSET_COUNT} coset generators to {path}")
    return path


def read_generator_fixture(path: Union[str, Path]) -> List[str]:
    lines = [line.strip() for line in Path(path).read_text(encoding="ascii").splitlines()]
    return [line for line in lines if line]


def check_generator_fixture(path: Union[str, Path]) -> bool:
    """Cross-check computed generators against the fixture; False if it is absent."""
    path = Path(path)
    if not path.exists():
        logger.warning(f"Generator fixture {path} not found, skipping cross-check")
        return False
    recorded = read_generator_fixture(path)
    if len(recorded) != COSET_COUNT:
        raise ConfigError(f"{path} holds {len(recorded)} generators, expected {COSET_COUNT}")
    for i, line in enumerate(recorded):
        if line.lower() != coset_generator(i).hex():
            raise ConfigError(f"generator g_{i} does not match {path}")
    logger.info(f"Coset generators match {path}")
    return True


def is_trivial_key(k: Scalar) -> bool:
    return k.value in (1, Q - 1)


def in_h(x: Scalar) -> bool:
    """Membership in H: x^h = 1."""
    return x.value != 0 and pow(x.value, H, Q) == 1
