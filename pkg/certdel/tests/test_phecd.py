import numpy as np
import pytest

from certdel.exceptions import KeyLengthError, RegisterConsumedError
from certdel.utils import bits as bitops
from certdel.utils import wire
from certdel.utils.phecd import decode_cert_list, decode_vk_list, encode_cert_list, encode_vk_list
from certdel.utils.presets import build_components, preset_values

from .factories import PheCdFactory


def components(preset, **overrides):
    values = preset_values(preset)
    values.update(overrides)
    return build_components(values)


def roundtrip_failures(phecd, trials, rng):
    failures = 0
    for _ in range(trials):
        message = bitops.random_bits(rng, 1)
        triple = phecd.keygen(rng)
        _, ct = phecd.enc(triple.x, message, rng)
        recovered = phecd.dec(triple.y, ct, rng)
        failures += recovered is None or not np.array_equal(recovered, message)
    return failures


@pytest.fixture
def rng():
    return np.random.default_rng(99)


class TestRoundtrip:
    @pytest.mark.parametrize('per_bit_capsule', [False, True])
    def test_noiseless(self, rng, per_bit_capsule):
        phecd = components('noiseless', per_bit_capsule=per_bit_capsule).phecd
        message = bitops.from_str('10')
        triple = phecd.keygen(rng)
        vks, ct = phecd.enc(triple.x, message, rng)
        assert len(vks) == 2 and len(ct.c2) == 2
        assert len(ct.capsules) == (2 if per_bit_capsule else 1)
        assert np.array_equal(phecd.dec(triple.y, ct, rng), message)

    @pytest.mark.parametrize('per_bit_capsule', [False, True])
    def test_enc_with_keys_returns_encapsulated_keys(self, rng, per_bit_capsule):
        phecd = components('noiseless', per_bit_capsule=per_bit_capsule).phecd
        triple = phecd.keygen(rng)
        _, ct, keys = phecd.enc_with_keys(triple.x, bitops.from_str('01'), rng)
        recovered = phecd.recover_keys(triple.x, ct)
        assert len(keys) == len(ct.capsules)
        assert all(np.array_equal(a, b) for a, b in zip(keys, recovered))
        assert np.array_equal(phecd.dec_with_keys(keys, ct, rng), bitops.from_str('01'))

    def test_bad_later_key_measures_nothing(self, rng):
        phecd = components('noiseless', per_bit_capsule=True).phecd
        triple = phecd.keygen(rng)
        vks, ct, keys = phecd.enc_with_keys(triple.x, bitops.from_str('110'), rng)
        keys[2] = keys[2][:1]
        assert phecd.dec_with_keys(keys, ct, rng) is None
        assert not any(c2.qpart.consumed for c2 in ct.c2)
        assert phecd.verify(vks, phecd.delete(ct, rng))

    def test_stream_long_message(self, rng):
        phecd = components('reference', p_b=0.0).phecd
        message = bitops.random_bits(rng, 24)
        triple = phecd.keygen(rng)
        _, ct = phecd.enc(triple.x, message, rng)
        assert np.array_equal(phecd.dec(triple.y, ct, rng), message)

    def test_otp_key_too_short(self, rng):
        phecd = components('noiseless').phecd
        triple = phecd.keygen(rng)
        with pytest.raises(KeyLengthError):
            phecd.enc(triple.x, bitops.from_str('101'), rng)

    def test_per_bit_capsule_lifts_key_limit(self, rng):
        phecd = components('noiseless', per_bit_capsule=True).phecd
        message = bitops.from_str('10110')
        triple = phecd.keygen(rng)
        _, ct = phecd.enc(triple.x, message, rng)
        assert np.array_equal(phecd.dec(triple.y, ct, rng), message)

    def test_bad_capsule_gives_bottom_without_measuring(self, rng):
        phecd = PheCdFactory()
        triple = phecd.keygen(rng)
        _, ct = phecd.enc(triple.x, bitops.from_str('1'), rng)
        ct.c1 = ct.c1.with_flipped_tag_bit(0)
        assert phecd.dec(triple.y, ct, rng) is None
        assert not ct.c2[0].qpart.consumed

    def test_noiseless_never_fails(self, rng):
        assert roundtrip_failures(components('noiseless').phecd, 2000, rng) == 0

    def test_reference_failure_rate(self, rng):
        phecd = components('reference').phecd
        trials = 2000
        delta = phecd.ikem.params.delta
        failures = roundtrip_failures(phecd, trials, rng)
        assert failures / trials <= delta + 4 * np.sqrt(delta * (1 - delta) / trials)

    @pytest.mark.slow
    def test_reference_failure_rate_full(self, rng):
        phecd = components('reference').phecd
        trials = 10000
        delta = phecd.ikem.params.delta
        failures = roundtrip_failures(phecd, trials, rng)
        assert failures / trials <= delta + 3 * np.sqrt(delta * (1 - delta) / trials)


class TestDeletion:
    def test_delete_and_verify(self, rng):
        phecd = components('reference', p_b=0.0).phecd
        triple = phecd.keygen(rng)
        message = bitops.from_str('0110')
        vks, ct = phecd.enc(triple.x, message, rng)
        c1_before = ct.c1.to_bytes()
        certs = phecd.delete(ct, rng)
        assert phecd.verify(vks, certs)
        assert ct.c1.to_bytes() == c1_before

    def test_decrypt_after_delete_raises(self, rng):
        phecd = components('noiseless').phecd
        triple = phecd.keygen(rng)
        _, ct = phecd.enc(triple.x, bitops.from_str('1'), rng)
        phecd.delete(ct, rng)
        with pytest.raises(RegisterConsumedError):
            phecd.dec(triple.y, ct, rng)

    def test_delete_after_decrypt_raises(self, rng):
        phecd = components('noiseless').phecd
        triple = phecd.keygen(rng)
        _, ct = phecd.enc(triple.x, bitops.from_str('1'), rng)
        phecd.dec(triple.y, ct, rng)
        with pytest.raises(RegisterConsumedError):
            phecd.delete(ct, rng)


class TestSerialisation:
    def test_classical_bytes_layout(self, rng):
        phecd = components('reference', p_b=0.0).phecd
        triple = phecd.keygen(rng)
        _, ct = phecd.enc(triple.x, bitops.from_str('101'), rng)
        data = ct.classical_bytes()
        c1 = ct.c1.to_bytes()
        assert data.startswith(c1)
        items, offset = wire.read_sequence(data, len(c1))
        wire.expect_end(data, offset)
        assert items == [c2.cpart.to_bytes() for c2 in ct.c2]

    def test_vk_and_cert_lists(self, rng):
        phecd = components('noiseless').phecd
        triple = phecd.keygen(rng)
        vks, ct = phecd.enc(triple.x, bitops.from_str('01'), rng)
        certs = phecd.delete(ct, rng)
        assert phecd.verify(decode_vk_list(encode_vk_list(vks)), decode_cert_list(encode_cert_list(certs)))
