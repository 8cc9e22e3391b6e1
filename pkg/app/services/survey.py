"""
Subgroup catalogs for other curves' key spaces.

F_n^* is cyclic for prime n, so each divisor d of n - 1 is the order of exactly
one subgroup. A catalog lists the divisors under a budget; the report estimates
how long a coset-style sweep of each would take.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from app.core.errors import CatalogTooLarge, ConfigError
from app.services.scalar_group import H, OrderFactorization, P1, P2, P3, Q

MAX_CATALOG = 10**7
FEASIBLE_MIN_ORDER = 10**6


@dataclass(frozen=True)
class CurveProfile:
    name: str
    order: int
    order_minus_one: OrderFactorization
    constants: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.order_minus_one.product != self.order - 1:
            raise ConfigError(f"{self.name}: factorization does not multiply to order - 1")


CURVE25519_L = 2**252 + 27742317777372353535851937790883648493
_C25519_Q1 = 276602624281642239937218680557139826668747
_C25519_Q2 = 198211423230930754013084525763697

P256_N = 115792089210356248762697446949407573529996955224135760342422259061068512044369
_P256_Q1 = 2624747550333869278416773953
_P256_Q2 = 1002328039319

PROFILES: Dict[str, CurveProfile] = {
    "secp256k1": CurveProfile(
        name="secp256k1",
        order=Q,
        order_minus_one=OrderFactorization.of((2, 6), (3, 1), (149, 1), (631, 1), (P1, 1), (P2, 1), (P3, 1)),
    ),
    "curve25519": CurveProfile(
        name="curve25519",
        order=CURVE25519_L,
        order_minus_one=OrderFactorization.of((2, 2), (3, 1), (11, 1), (_C25519_Q2, 1), (_C25519_Q1, 1)),
        constants={"p": 2**255 - 19, "A": 486662, "cofactor": 8},
    ),
    "p256": CurveProfile(
        name="p256",
        order=P256_N,
        order_minus_one=OrderFactorization.of(
            (2, 4), (3, 1), (71, 1), (131, 1), (373, 1), (3407, 1), (17449, 1), (38189, 1),
            (187019741, 1), (622491383, 1), (_P256_Q2, 1), (_P256_Q1, 1),
        ),
        constants={
            "p": 2**256 - 2**224 + 2**192 + 2**96 - 1,
            "B": 41058363725152142129326129780047268409114441015993725554835256314039467401291,
        },
    ),
}


def get_profile(name: str) -> CurveProfile:
    try:
        return PROFILES[name.lower()]
    except KeyError:
        raise ConfigError(f"unknown curve {name!r}; choose from {', '.join(PROFILES)}") from None


@dataclass(frozen=True)
class DivisorCatalog:
    profile: str
    budget: int
    divisors: Tuple[Tuple[int, OrderFactorization], ...]

    @property
    def values(self) -> List[int]:
        return [d for d, _ in self.divisors]

    @property
    def maximum(self) -> int:
        return self.divisors[-1][0] if self.divisors else 1


def divisors_under(profile: CurveProfile, budget: int, limit: int = MAX_CATALOG) -> DivisorCatalog:
    """Every divisor of order - 1 that is <= budget, ascending, with its factorization."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    factors = profile.order_minus_one.factors
    found: List[Tuple[int, Tuple[Tuple[int, int], ...]]] = []

    def walk(index: int, value: int, chosen: Tuple[Tuple[int, int], ...]) -> None:
        if index == len(factors):
            found.append((value, chosen))
            if len(found) > limit:
                raise CatalogTooLarge(f"more than {limit} divisors under {budget}")
            return
        prime, exponent = factors[index]
        power = 1
        for e in range(exponent + 1):
            if value * power > budget:
                break
            walk(index + 1, value * power, chosen + (((prime, e),) if e else ()))
            power *= prime

    walk(0, 1, ())
    found.sort()
    return DivisorCatalog(
        profile=profile.name,
        budget=budget,
        divisors=tuple((d, OrderFactorization(chosen)) for d, chosen in found),
    )


def _duration(seconds: float) -> str:
    for unit, size in (("y", 365 * 86400), ("d", 86400), ("h", 3600), ("m", 60)):
        if seconds >= size:
            return f"{seconds / size:.1f}{unit}"
    return f"{seconds:.1f}s"


def report_data(catalog: DivisorCatalog, rate: float = 50_000.0) -> Dict[str, Any]:
    feasible = catalog.maximum >= FEASIBLE_MIN_ORDER
    return {
        "profile": catalog.profile,
        "budget": catalog.budget,
        "rate": rate,
        "count": len(catalog.divisors),
        "max_subgroup_order": catalog.maximum,
        "feasible": feasible,
        "reference_order": H,
        "divisors": [
            {"order": d, "factorization": str(f), "scan_seconds": d / rate}
            for d, f in catalog.divisors
        ],
    }


def report(catalog: DivisorCatalog, rate: float = 50_000.0, limit_rows: Optional[int] = None) -> str:
    data = report_data(catalog, rate)
    rows = data["divisors"] if limit_rows is None else data["divisors"][-limit_rows:]
    width = max(len(str(r["order"])) for r in rows) if rows else 5
    lines = [
        f"curve: {catalog.profile}  budget: {catalog.budget}  rate: {rate:g} keys/s",
        f"{'order':>{width}}  {'scan time':>10}  factorization",
    ]
    for r in rows:
        lines.append(f"{r['order']:>{width}}  {_duration(r['scan_seconds']):>10}  {r['factorization']}")
    lines.append(f"max feasible subgroup order: {data['max_subgroup_order']}")
    if data["feasible"]:
        lines.append(
            f"a coset sweep comparable to h = {H} is feasible "
            f"({_duration(data['max_subgroup_order'] / rate)} for the largest subgroup)"
        )
    else:
        lines.append(
            f"infeasible: no subgroup of order >= {FEASIBLE_MIN_ORDER} under the budget; "
            f"a sweep comparable to h = {H} cannot be performed"
        )
    return "\n".join(lines)
