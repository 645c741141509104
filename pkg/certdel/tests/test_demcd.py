import numpy as np
import pytest

from certdel.exceptions import KeyLengthError, LengthMismatchError, ParameterError, RegisterConsumedError
from certdel.utils import bits as bitops
from certdel.utils.dem import STREAM
from certdel.utils.demcd import Certificate, DemCd, STRICT_MODE, VerificationKey, mask_bit

from .factories import DemCdFactory, DemFactory


@pytest.fixture
def rng():
    return np.random.default_rng(77)


class TestEncap:
    def test_fixed_randomness(self, rng):
        demcd = DemCdFactory(lam=4)
        key = demcd.gen(rng)
        x = bitops.from_str('1011')
        theta = bitops.from_str('0101')
        vk, c2 = demcd.encap(key, 1, rng, x=x, theta=theta)
        assert np.array_equal(vk.x, x) and np.array_equal(vk.theta, theta)
        plaintext = demcd.dem.decap(key, c2.cpart)
        assert np.array_equal(plaintext[:4], theta)
        # θ = 0 的位置是 0 号和 2 号：x_0 ⊕ x_2 = 1 ⊕ 1 = 0
        assert plaintext[4] == 1
        assert c2.qpart.describe() == '|1⟩|+⟩|1⟩|−⟩'

    def test_mask_bit(self):
        assert mask_bit(bitops.from_str('111'), bitops.from_str('111')) == 0
        assert mask_bit(bitops.from_str('110'), bitops.from_str('001')) == 0
        assert mask_bit(bitops.from_str('100'), bitops.from_str('011')) == 1

    def test_key_requirements(self):
        assert DemCdFactory(lam=3).key_len_for(3) == 12
        assert DemCdFactory(lam=3, dem=DemFactory(variant=STREAM)).key_len_for(3) == 1

    def test_short_otp_key(self, rng):
        demcd = DemCdFactory(lam=3)
        with pytest.raises(KeyLengthError):
            demcd.encap(bitops.from_str('101'), 1, rng)
        with pytest.raises(KeyLengthError):
            demcd.encap_multi(demcd.gen(rng), bitops.from_str('11'), rng)

    def test_invalid_lambda(self):
        with pytest.raises(ParameterError):
            DemCd(DemFactory(), 0)


class TestCorrectness:
    @pytest.mark.parametrize('variant', ['otp', 'stream'])
    def test_decrypt(self, rng, variant):
        demcd = DemCdFactory(lam=16, dem=DemFactory(variant=variant))
        message = bitops.random_bits(rng, 32)
        key = demcd.gen(rng, len(message))
        _, c2s = demcd.encap_multi(key, message, rng)
        assert np.array_equal(demcd.decap_multi(key, c2s, rng), message)

    def test_honest_deletion_never_rejected(self, rng):
        demcd = DemCdFactory(lam=16)
        rejections = 0
        for _ in range(10000):
            key = demcd.gen(rng)
            vk, c2 = demcd.encap(key, int(rng.integers(0, 2)), rng)
            rejections += not demcd.verify(vk, demcd.delete(c2, rng))
        assert rejections == 0

    def test_multi_bit_deletion(self, rng):
        demcd = DemCdFactory(lam=8, dem=DemFactory(variant=STREAM))
        key = demcd.gen(rng)
        vks, c2s = demcd.encap_multi(key, bitops.from_str('1001'), rng)
        certs = demcd.delete_multi(c2s, rng)
        assert demcd.verify_multi(vks, certs)
        with pytest.raises(LengthMismatchError):
            demcd.verify_multi(vks, certs[:-1])

    def test_dem_failure_leaves_register_intact(self, rng):
        demcd = DemCdFactory(lam=3)
        key = demcd.gen(rng)
        vk, c2 = demcd.encap(key, 1, rng)
        assert demcd.decap(key[:2], c2, rng) is None
        assert not c2.qpart.consumed
        assert demcd.verify(vk, demcd.delete(c2, rng))

    def test_late_dem_failure_measures_nothing(self, rng):
        demcd = DemCdFactory(lam=3)
        key = demcd.gen(rng, 3)
        vks, c2s = demcd.encap_multi(key, bitops.from_str('101'), rng)
        # 只够前两个比特的密钥，第三个比特的经典部分解不开
        assert demcd.decap_multi(key[:8], c2s, rng) is None
        assert not any(c2.qpart.consumed for c2 in c2s)
        assert demcd.verify_multi(vks, demcd.delete_multi(c2s, rng))


class TestExclusivity:
    def test_delete_then_decrypt(self, rng):
        demcd = DemCdFactory(lam=4)
        errors = 0
        trials = 10000
        for _ in range(trials):
            key = demcd.gen(rng)
            _, c2 = demcd.encap(key, 0, rng)
            demcd.delete(c2, rng)
            try:
                demcd.decap(key, c2, rng)
            except RegisterConsumedError:
                errors += 1
        assert errors == trials

    def test_decrypt_then_delete(self, rng):
        demcd = DemCdFactory(lam=4)
        key = demcd.gen(rng)
        _, c2 = demcd.encap(key, 1, rng)
        assert demcd.decap(key, c2, rng) == 1
        with pytest.raises(RegisterConsumedError):
            demcd.delete(c2, rng)


class TestVerify:
    def test_certificate_length(self, rng):
        demcd = DemCdFactory(lam=4)
        vk, _ = demcd.encap(demcd.gen(rng), 0, rng)
        with pytest.raises(LengthMismatchError):
            demcd.verify(vk, Certificate(bitops.from_str('101')))

    def test_unknown_mode(self, rng):
        demcd = DemCdFactory(lam=2)
        vk, _ = demcd.encap(demcd.gen(rng), 0, rng)
        with pytest.raises(ParameterError):
            demcd.verify(vk, Certificate(bitops.from_str('00')), mode='lenient')

    def test_default_mode_ignores_computational_positions(self):
        demcd = DemCdFactory(lam=3)
        vk = VerificationKey(bitops.from_str('110'), bitops.from_str('010'))
        assert demcd.verify(vk, Certificate(bitops.from_str('010')))
        assert not demcd.verify(vk, Certificate(bitops.from_str('000')))
        assert not demcd.verify(vk, Certificate(bitops.from_str('010')), STRICT_MODE)
        assert demcd.verify(vk, Certificate(bitops.from_str('110')), STRICT_MODE)

    def test_strict_mode_rejects_honest_deletion(self, rng):
        demcd = DemCdFactory(lam=4)
        trials = 8000
        accepted = 0
        for _ in range(trials):
            vk, c2 = demcd.encap(demcd.gen(rng), 0, rng)
            accepted += demcd.verify(vk, demcd.delete(c2, rng), STRICT_MODE)
        expected = 0.75 ** 4
        assert abs(accepted / trials - expected) < 4 * np.sqrt(expected * (1 - expected) / trials)

    def test_random_certificate_acceptance(self, rng):
        demcd = DemCdFactory(lam=4)
        trials = 8000
        accepted = 0
        for _ in range(trials):
            vk, _ = demcd.encap(demcd.gen(rng), 0, rng)
            accepted += demcd.verify(vk, Certificate(bitops.random_bits(rng, 4)))
        expected = 0.75 ** 4
        assert abs(accepted / trials - expected) < 4 * np.sqrt(expected * (1 - expected) / trials)


class TestSerialisation:
    def test_vk_layout(self):
        vk = VerificationKey(bitops.from_str('101'), bitops.from_str('011'))
        data = vk.to_bytes()
        assert data == b'\x03\x00\xa0\x03\x00\x60'
        parsed = VerificationKey.from_bytes(data)
        assert bitops.to_str(parsed.x) == '101' and bitops.to_str(parsed.theta) == '011'

    def test_vk_lengths_must_agree(self):
        with pytest.raises(LengthMismatchError):
            VerificationKey(bitops.from_str('10'), bitops.from_str('1'))

    def test_certificate_rejects_trailing_bytes(self):
        data = Certificate(bitops.from_str('1111')).to_bytes()
        with pytest.raises(LengthMismatchError):
            Certificate.from_bytes(data + b'\x00')
