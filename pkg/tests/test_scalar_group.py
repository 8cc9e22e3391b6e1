import random

import pytest

from app.core.config import settings
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
from app.services.scalar_group import (
    COSET_COUNT,
    H,
    P1,
    P2,
    P3,
    Q,
    Q_MINUS_ONE,
    OrderFactorization,
    Scalar,
    check_generator_fixture,
    coset_element,
    coset_generator,
    coset_iter,
    coset_spec,
    in_h,
    is_trivial_key,
    locate_in_coset,
    mod_exp,
    mod_inv,
    mod_mul,
    read_generator_fixture,
    scalar_from_bytes,
    scalar_from_hex,
    subgroup_order,
    verify_order,
    write_generator_fixture,
)


def square_and_multiply(base, exponent, modulus):
    result = 1
    base %= modulus
    while exponent:
        if exponent & 1:
            result = result * base % modulus
        base = base * base % modulus
        exponent >>= 1
    return result


def test_factorization_of_q_minus_one():
    assert H == 2**6 * 3 * 149 * 631 == 18051648
    assert H * P1 * P2 * P3 == Q - 1
    assert Q_MINUS_ONE.product == Q - 1
    assert str(subgroup_order(0)) == "2^6 * 3 * 149 * 631"


def test_scalar_parsing():
    assert scalar_from_bytes((1).to_bytes(32, "big")) == Scalar(1)
    with pytest.raises(OutOfRange):
        scalar_from_bytes(Q.to_bytes(32, "big"))
    with pytest.raises(ZeroKey):
        scalar_from_bytes(bytes(32), as_key=True)
    assert scalar_from_bytes(bytes(32)) == Scalar(0)
    with pytest.raises(BadLength):
        scalar_from_bytes(bytes(31))
    assert scalar_from_hex("0x01").value == 1
    with pytest.raises(OutOfRange):
        Scalar(Q)


def test_mod_mul_known_values():
    x = Scalar(123456789)
    assert mod_mul(Scalar(1), x) == x
    assert mod_mul(Scalar(Q - 1), Scalar(Q - 1)) == Scalar(1)
    assert mod_mul(Scalar(7), Scalar(7)) == Scalar(49)
    assert mod_mul(x, mod_inv(x)) == Scalar(1)


def test_mod_exp_known_values():
    assert mod_exp(Scalar(5), 0) == Scalar(1)
    assert mod_exp(7, Q - 1) == Scalar(1)
    assert mod_exp(7, P1 * P2 * P3) == coset_generator(0)
    with pytest.raises(ZeroBase):
        mod_exp(0, 3)


def test_mod_exp_matches_square_and_multiply():
    rng = random.Random(1)
    for _ in range(20):
        base = rng.randrange(1, Q)
        exponent = rng.randrange(0, Q)
        assert mod_exp(base, exponent).value == square_and_multiply(base, exponent, Q)


def test_generators_match_definition():
    exponents = [P1 * P2 * P3, H * P2 * P3, H * P1 * P3, H * P1 * P2, H * P1, H * P2, H * P3, H]
    for i, e in enumerate(exponents):
        assert coset_generator(i).value == square_and_multiply(7, e, Q)
    with pytest.raises(IndexOutOfRange):
        coset_generator(8)


def test_subgroup_orders():
    assert subgroup_order(0).product == H
    assert subgroup_order(1).product == P1
    assert subgroup_order(3).product == 341948486974166000522343609283189
    assert subgroup_order(6).product == P1 * P2
    assert subgroup_order(7).product == P1 * P2 * P3


@pytest.mark.parametrize("i", range(COSET_COUNT))
def test_every_generator_has_its_claimed_order(i):
    assert verify_order(coset_generator(i), subgroup_order(i))


def test_verify_order():
    assert verify_order(Scalar(1), OrderFactorization(()))
    assert verify_order(Scalar(7), Q_MINUS_ONE)
    assert not verify_order(coset_generator(0), OrderFactorization.of((2, 6)))
    assert not verify_order(coset_generator(1), subgroup_order(0))
    with pytest.raises(NonDivisor):
        verify_order(Scalar(2), OrderFactorization.of((5, 1)))
    with pytest.raises(ZeroBase):
        verify_order(Scalar(0), subgroup_order(0))


def test_coset_iter_known_values():
    assert list(coset_iter(coset_spec(0), 0, 1)) == [(0, Scalar(1))]
    assert list(coset_iter(coset_spec(0), H // 2, 1)) == [(H // 2, Scalar(Q - 1))]
    assert list(coset_iter(coset_spec(1), 0, 1)) == [(0, coset_generator(1))]
    assert list(coset_iter(coset_spec(2), 7, 0)) == []


def test_coset_iter_steps_by_g0():
    spec = coset_spec(3)
    g0 = coset_generator(0).value
    walked = list(coset_iter(spec, 100, 5))
    assert [j for j, _ in walked] == [100, 101, 102, 103, 104]
    for (_, a), (_, b) in zip(walked, walked[1:]):
        assert b.value == a.value * g0 % Q
    for j, k in walked:
        assert k == coset_element(spec, j)


def test_coset_iter_rejects_overflow_eagerly():
    with pytest.raises(RangeOverflow):
        coset_iter(coset_spec(0), H - 1, 2)
    with pytest.raises(RangeOverflow):
        coset_element(coset_spec(0), H)


def test_cosets_are_disjoint_from_h():
    assert in_h(coset_generator(0))
    for i in range(1, COSET_COUNT):
        assert not in_h(coset_generator(i))
    assert mod_exp(coset_generator(0), H) == Scalar(1)


@pytest.mark.parametrize("i,j", [(0, 0), (0, 12345), (2, 1), (5, H - 1), (7, 999_999)])
def test_locate_in_coset_inverts_coset_element(i, j):
    assert locate_in_coset(coset_element(coset_spec(i), j)) == (i, j)


def test_locate_in_coset_of_minus_one():
    assert locate_in_coset(Scalar(Q - 1)) == (0, H // 2)


def test_locate_outside_cosets():
    assert locate_in_coset(Scalar(2)) is None
    assert locate_in_coset(Scalar(0)) is None


def test_trivial_keys():
    assert is_trivial_key(Scalar(1))
    assert is_trivial_key(Scalar(Q - 1))
    assert not is_trivial_key(Scalar(2))


def test_generator_fixture_roundtrip(tmp_path):
    path = tmp_path / "coset_generators.hex"
    assert check_generator_fixture(path) is False
    write_generator_fixture(path)
    lines = path.read_text().split()
    assert len(lines) == COSET_COUNT and all(len(line) == 64 for line in lines)
    assert check_generator_fixture(path) is True
    lines[3] = "00" * 32
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ConfigError):
        check_generator_fixture(path)


def test_committed_generator_fixture():
    recorded = read_generator_fixture(settings.GENERATORS_FIXTURE)
    exponents = [P1 * P2 * P3, H * P2 * P3, H * P1 * P3, H * P1 * P2, H * P1, H * P2, H * P3, H]
    assert recorded == [f"{square_and_multiply(7, e, Q):064x}" for e in exponents]
    assert check_generator_fixture(settings.GENERATORS_FIXTURE) is True


def test_mod_exp_adds_exponents():
    rng = random.Random(17)
    for _ in range(100):
        x = Scalar(rng.randrange(1, Q))
        a, b = rng.randrange(0, Q), rng.randrange(0, Q)
        assert mod_exp(x, a + b) == mod_mul(mod_exp(x, a), mod_exp(x, b))


def test_coset_zero_window_has_no_repeats():
    window = [k.value for _, k in coset_iter(coset_spec(0), 0, 10**5)]
    assert len(set(window)) == 10**5


@pytest.mark.parametrize("i", range(COSET_COUNT))
def test_coset_steps_at_random_exponents(i):
    rng = random.Random(i)
    spec = coset_spec(i)
    for _ in range(20):
        j = rng.randrange(0, H - 1)
        assert coset_element(spec, j + 1) == mod_mul(coset_element(spec, j), coset_generator(0))
