"""
secp256k1 point arithmetic: y^2 = x^3 + 7 over F_p.

Field elements are plain ints kept canonical in [0, p). Accumulation runs in
Jacobian coordinates (x = X/Z^2, y = Y/Z^3); fixed-base multiplication uses one
table of small multiples per window so k*P costs at most one mixed addition per
window. Nothing here is constant time.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple, Union
import logging

from app.core.errors import BadLength, ConfigError, InfinityPoint, ZeroKey
from app.services.scalar_group import Q, Scalar

logger = logging.getLogger(__name__)

P = 2**256 - 2**32 - 2**9 - 2**8 - 2**7 - 2**6 - 2**4 - 1
B = 7
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

_Jac = Tuple[int, int, int]
_Aff = Optional[Tuple[int, int]]


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = _Infinity()


@dataclass(frozen=True, slots=True)
class AffinePoint:
    x: int
    y: int


@dataclass(frozen=True, slots=True)
class JacobianPoint:
    X: int
    Y: int
    Z: int


CurvePoint = Union[AffinePoint, JacobianPoint, _Infinity]

GENERATOR = AffinePoint(GX, GY)


# Raw Jacobian arithmetic on tuples; Z == 0 encodes infinity.

def _jdouble(p: _Jac) -> _Jac:
    X1, Y1, Z1 = p
    if Z1 == 0 or Y1 == 0:
        return (1, 1, 0)
    A = X1 * X1 % P
    Bq = Y1 * Y1 % P
    C = Bq * Bq % P
    D = 2 * ((X1 + Bq) ** 2 - A - C) % P
    E = 3 * A % P
    F = E * E % P
    X3 = (F - 2 * D) % P
    Y3 = (E * (D - X3) - 8 * C) % P
    Z3 = 2 * Y1 * Z1 % P
    return (X3, Y3, Z3)


def _jadd(p: _Jac, q: _Jac) -> _Jac:
    X1, Y1, Z1 = p
    X2, Y2, Z2 = q
    if Z1 == 0:
        return q
    if Z2 == 0:
        return p
    Z1Z1 = Z1 * Z1 % P
    Z2Z2 = Z2 * Z2 % P
    U1 = X1 * Z2Z2 % P
    U2 = X2 * Z1Z1 % P
    S1 = Y1 * Z2 * Z2Z2 % P
    S2 = Y2 * Z1 * Z1Z1 % P
    Hd = (U2 - U1) % P
    r = 2 * (S2 - S1) % P
    if Hd == 0:
        if r == 0:
            return _jdouble(p)
        return (1, 1, 0)
    I = 4 * Hd * Hd % P
    J = Hd * I % P
    V = U1 * I % P
    X3 = (r * r - J - 2 * V) % P
    Y3 = (r * (V - X3) - 2 * S1 * J) % P
    Z3 = ((Z1 + Z2) ** 2 - Z1Z1 - Z2Z2) * Hd % P
    return (X3, Y3, Z3)


def _jadd_affine(p: _Jac, x2: int, y2: int) -> _Jac:
    X1, Y1, Z1 = p
    if Z1 == 0:
        return (x2, y2, 1)
    Z1Z1 = Z1 * Z1 % P
    U2 = x2 * Z1Z1 % P
    S2 = y2 * Z1 * Z1Z1 % P
    Hd = (U2 - X1) % P
    r = 2 * (S2 - Y1) % P
    if Hd == 0:
        if r == 0:
            return _jdouble(p)
        return (1, 1, 0)
    HH = Hd * Hd % P
    I = 4 * HH
    J = Hd * I % P
    V = X1 * I % P
    X3 = (r * r - J - 2 * V) % P
    Y3 = (r * (V - X3) - 2 * Y1 * J) % P
    Z3 = ((Z1 + Hd) ** 2 - Z1Z1 - HH) % P
    return (X3, Y3, Z3)


def _normalize_many(points: Sequence[_Jac]) -> List[_Aff]:
    """Montgomery batch inversion: one field inversion for the whole batch."""
    prefix: List[int] = []
    acc = 1
    for _, _, Z in points:
        if Z != 0:
            acc = acc * Z % P
        prefix.append(acc)
    if not points:
        return []
    inv = pow(acc, -1, P)
    out: List[_Aff] = [None] * len(points)
    for idx in range(len(points) - 1, -1, -1):
        X, Y, Z = points[idx]
        if Z == 0:
            continue
        before = prefix[idx - 1] if idx > 0 else 1
        z_inv = inv * before % P
        inv = inv * Z % P
        z2 = z_inv * z_inv % P
        out[idx] = (X * z2 % P, Y * z2 * z_inv % P)
    return out


def _to_jac(pt: CurvePoint) -> _Jac:
    if pt is INFINITY:
        return (1, 1, 0)
    if isinstance(pt, AffinePoint):
        return (pt.x, pt.y, 1)
    return (pt.X % P, pt.Y % P, pt.Z % P)


def _from_aff(raw: _Aff) -> CurvePoint:
    return INFINITY if raw is None else AffinePoint(*raw)


def to_affine(pt: CurvePoint) -> CurvePoint:
    return _from_aff(_normalize_many([_to_jac(pt)])[0])


def is_on_curve(pt: CurvePoint) -> bool:
    if pt is INFINITY:
        return True
    if isinstance(pt, JacobianPoint):
        if pt.Z % P == 0:
            return False
        Z2 = pt.Z * pt.Z % P
        Z6 = Z2 * Z2 * Z2 % P
        return (pt.Y * pt.Y - pt.X ** 3 - B * Z6) % P == 0
    if not (0 <= pt.x < P and 0 <= pt.y < P):
        return False
    return (pt.y * pt.y - pt.x ** 3 - B) % P == 0


def point_neg(pt: CurvePoint) -> CurvePoint:
    if pt is INFINITY:
        return INFINITY
    a = to_affine(pt)
    return AffinePoint(a.x, (P - a.y) % P)


def point_add(a: CurvePoint, b: CurvePoint) -> CurvePoint:
    """Group law; the result is returned in affine form."""
    return _from_aff(_normalize_many([_jadd(_to_jac(a), _to_jac(b))])[0])


def point_double(a: CurvePoint) -> CurvePoint:
    return _from_aff(_normalize_many([_jdouble(_to_jac(a))])[0])


def batch_normalize(points: Sequence[CurvePoint]) -> List[CurvePoint]:
    return [_from_aff(raw) for raw in _normalize_many([_to_jac(pt) for pt in points])]


@dataclass(frozen=True)
class PrecompTable:
    """tables[w][d] = d * 2^(w * window_bits) * P, affine; tables[w][0] is infinity."""

    window_bits: int
    tables: Tuple[Tuple[_Aff, ...], ...]

    @property
    def windows(self) -> int:
        return len(self.tables)

    def point(self, w: int, d: int) -> CurvePoint:
        return _from_aff(self.tables[w][d])


def build_table(window_bits: int = 4) -> PrecompTable:
    if not 1 <= window_bits <= 8:
        raise ConfigError(f"window width {window_bits} is not in [1, 8]")
    windows = -(-256 // window_bits)
    width = 1 << window_bits
    base: _Jac = (GX, GY, 1)
    flat: List[_Jac] = []
    for _ in range(windows):
        multiple = base
        row = [multiple]
        for _ in range(2, width):
            multiple = _jadd(multiple, base)
            row.append(multiple)
        flat.extend(row)
        base = _jadd(multiple, base)
    affine = _normalize_many(flat)
    per = width - 1
    tables = tuple(
        (None,) + tuple(affine[w * per:(w + 1) * per]) for w in range(windows)
    )
    logger.debug(f"Built fixed-base table: {windows} windows x {per} points")
    return PrecompTable(window_bits=window_bits, tables=tables)


@lru_cache(maxsize=4)
def get_table(window_bits: int = 4) -> PrecompTable:
    """Process-wide shared table; built once per window width."""
    return build_table(window_bits)


def _mul_jacobian(k: int, table: PrecompTable) -> _Jac:
    bits = table.window_bits
    mask = (1 << bits) - 1
    acc: _Jac = (1, 1, 0)
    for w, row in enumerate(table.tables):
        d = (k >> (w * bits)) & mask
        if d:
            x, y = row[d]
            acc = _jadd_affine(acc, x, y)
    return acc


def _check_key(k: Scalar) -> int:
    if k.value == 0:
        raise ZeroKey("cannot multiply by a zero key")
    return k.value


def scalar_mul(k: Scalar, table: PrecompTable) -> AffinePoint:
    raw = _normalize_many([_mul_jacobian(_check_key(k), table)])[0]
    return AffinePoint(*raw)


def scalar_mul_batch(
    keys: Iterable[Scalar],
    table: PrecompTable,
    batch_size: int = 1024,
    engine: str = "table",
) -> List[AffinePoint]:
    """k*P for many keys, normalized in batches of batch_size."""
    if engine == "coincurve":
        return _coincurve_points(keys)
    if engine != "table":
        raise ConfigError(f"unknown engine {engine!r}")
    out: List[AffinePoint] = []
    pending: List[_Jac] = []
    for k in keys:
        pending.append(_mul_jacobian(_check_key(k), table))
        if len(pending) >= batch_size:
            out.extend(AffinePoint(*raw) for raw in _normalize_many(pending))
            pending = []
    if pending:
        out.extend(AffinePoint(*raw) for raw in _normalize_many(pending))
    return out


def _coincurve_points(keys: Iterable[Scalar]) -> List[AffinePoint]:
    try:
        from coincurve import PublicKey
    except ImportError as e:
        raise ConfigError("engine 'coincurve' requested but coincurve is not installed") from e
    return [
        AffinePoint(*PublicKey.from_secret(_check_key(k).to_bytes(32, "big")).point())
        for k in keys
    ]


def serialize_pubkey(pt: CurvePoint, compressed: bool) -> bytes:
    if pt is INFINITY:
        raise InfinityPoint("the point at infinity has no public key encoding")
    a = pt if isinstance(pt, AffinePoint) else to_affine(pt)
    x = a.x.to_bytes(32, "big")
    if compressed:
        return (b"\x03" if a.y & 1 else b"\x02") + x
    return b"\x04" + x + a.y.to_bytes(32, "big")


def deserialize_pubkey(data: bytes) -> AffinePoint:
    if len(data) == 65 and data[0] == 4:
        pt = AffinePoint(int.from_bytes(data[1:33], "big"), int.from_bytes(data[33:], "big"))
    elif len(data) == 33 and data[0] in (2, 3):
        x = int.from_bytes(data[1:], "big")
        if x >= P:
            raise BadLength("x coordinate is not a field element")
        y = pow((x ** 3 + B) % P, (P + 1) // 4, P)
        if (y & 1) != (data[0] & 1):
            y = P - y
        pt = AffinePoint(x, y)
    else:
        raise BadLength(f"unsupported public key encoding of {len(data)} bytes")
    if not is_on_curve(pt):
        raise BadLength("public key is not on secp256k1")
    return pt


__all__ = [
    "P", "Q", "B", "GX", "GY", "GENERATOR", "INFINITY",
    "AffinePoint", "JacobianPoint", "CurvePoint", "PrecompTable",
    "is_on_curve", "point_add", "point_double", "point_neg", "to_affine",
    "batch_normalize", "build_table", "get_table", "scalar_mul", "scalar_mul_batch",
    "serialize_pubkey", "deserialize_pubkey",
]
