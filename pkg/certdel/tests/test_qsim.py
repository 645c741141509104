import numpy as np
import pytest
from scipy.stats import chisquare

from certdel.exceptions import LengthMismatchError, ParameterError, RegisterConsumedError
from certdel.utils import bits as bitops
from certdel.utils import qsim


def binomial_slack(p, n, sigmas=4):
    return sigmas * np.sqrt(p * (1 - p) / n)


class TestPreparation:
    def test_bb84_angles(self):
        x = bitops.from_str('0101')
        theta = bitops.from_str('0011')
        assert qsim.bb84_angles(x, theta).tolist() == [0, 4, 2, 6]

    def test_describe_uses_symbols(self):
        reg = qsim.prepare_bb84(bitops.from_str('0011'), bitops.from_str('0101'))
        assert reg.describe() == '|0⟩|+⟩|1⟩|−⟩'

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            qsim.prepare_bb84(bitops.from_str('01'), bitops.from_str('1'))

    def test_empty_register_rejected(self):
        with pytest.raises((LengthMismatchError, ParameterError)):
            qsim.prepare_bb84(np.zeros(0, dtype=np.uint8), np.zeros(0, dtype=np.uint8))


class TestMeasurement:
    @pytest.mark.parametrize('seed', range(5))
    def test_matched_basis_is_deterministic(self, seed):
        rng = np.random.default_rng(seed)
        x = bitops.random_bits(rng, 64)
        theta = bitops.random_bits(rng, 64)
        reg = qsim.prepare_bb84(x, theta)
        assert np.array_equal(qsim.measure(reg, theta, rng), x)

    def test_second_measurement_raises(self):
        rng = np.random.default_rng(0)
        reg = qsim.prepare_bb84(bitops.from_str('01'), bitops.from_str('10'))
        qsim.measure(reg, bitops.from_str('10'), rng)
        assert reg.consumed
        with pytest.raises(RegisterConsumedError):
            qsim.measure(reg, bitops.from_str('10'), rng)

    def test_wrong_length_basis_does_not_consume(self):
        rng = np.random.default_rng(0)
        reg = qsim.prepare_bb84(bitops.from_str('01'), bitops.from_str('10'))
        with pytest.raises(LengthMismatchError):
            qsim.measure(reg, bitops.from_str('1'), rng)
        assert not reg.consumed

    def test_conjugate_basis_is_uniform(self):
        rng = np.random.default_rng(11)
        n = 20000
        reg = qsim.prepare_bb84(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))
        outcomes = qsim.measure(reg, np.ones(n, dtype=np.uint8), rng)
        assert abs(outcomes.mean() - 0.5) < binomial_slack(0.5, n)

    def test_breidbart_statistics(self):
        rng = np.random.default_rng(12)
        n = 20000
        reg = qsim.prepare_states(np.zeros(n, dtype=np.int64))
        outcomes = qsim.measure_in(reg, np.full(n, qsim.BREIDBART), rng)
        p0 = qsim.COS2_PI_8
        assert abs((1 - outcomes.mean()) - p0) < binomial_slack(p0, n)

    def test_outcome_probability_table(self):
        assert qsim.outcome_probability(0, qsim.COMPUTATIONAL, 0) == 1.0
        assert qsim.outcome_probability(4, qsim.COMPUTATIONAL, 0) == 0.0
        assert qsim.outcome_probability(2, qsim.COMPUTATIONAL, 1) == pytest.approx(0.5)
        assert qsim.outcome_probability(2, qsim.BREIDBART, 0) == pytest.approx(np.cos(np.pi / 8) ** 2)

    def test_measurement_collapses_product_state(self):
        rng = np.random.default_rng(3)
        reg = qsim.prepare_states([0, 0, 0])
        outcomes = qsim.measure_in(reg, [2, 2, 2], rng)
        assert reg.describe() == ''.join('|−⟩' if o else '|+⟩' for o in outcomes)


class TestDenseMode:
    def test_dense_register_matches_product(self):
        rng = np.random.default_rng(4)
        x = bitops.from_str('101')
        theta = bitops.from_str('011')
        density = qsim.to_density(qsim.prepare_bb84(x, theta))
        reg = qsim.dense_register(density)
        assert np.array_equal(qsim.measure(reg, theta, rng), x)
        with pytest.raises(RegisterConsumedError):
            qsim.measure(reg, theta, rng)

    def test_to_density_orders_qubit_zero_first(self):
        rho = qsim.to_density(qsim.prepare_bb84(bitops.from_str('10'), bitops.from_str('00')))
        expected = np.zeros((4, 4))
        expected[2, 2] = 1.0
        assert np.allclose(rho.data, expected)

    def test_to_density_limit(self):
        reg = qsim.prepare_states(np.zeros(4, dtype=np.int64))
        with pytest.raises(ParameterError):
            qsim.to_density(reg)


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ParameterError):
            qsim.DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ParameterError):
            qsim.DensityMatrix(np.array([[1.5, 0.0], [0.0, -0.5]]))

    def test_rejects_wrong_trace(self):
        with pytest.raises(ParameterError):
            qsim.DensityMatrix(np.eye(2))

    def test_rejects_four_qubits(self):
        with pytest.raises(ParameterError):
            qsim.DensityMatrix(np.eye(16) / 16)

    def test_trace_distance_zero_plus(self):
        zero = qsim.DensityMatrix(qsim.qubit_density(0))
        plus = qsim.DensityMatrix(qsim.qubit_density(2))
        assert qsim.trace_distance(zero, plus) == pytest.approx(np.sqrt(0.5), abs=1e-12)
        assert qsim.trace_distance(zero, zero) == pytest.approx(0.0, abs=1e-12)

    def test_trace_distance_orthogonal(self):
        zero = qsim.DensityMatrix(qsim.qubit_density(0))
        one = qsim.DensityMatrix(qsim.qubit_density(4))
        assert qsim.trace_distance(zero, one) == pytest.approx(1.0, abs=1e-12)

    def test_trace_norm_of_unnormalised_block(self):
        block = 0.25 * (qsim.qubit_density(0) - qsim.qubit_density(4))
        assert qsim.trace_norm(block) == pytest.approx(0.5)


def random_density(rng, num_qubits):
    dim = 2 ** num_qubits
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return qsim.DensityMatrix(rho / np.trace(rho).real)


class TestTraceDistanceMetric:
    @pytest.mark.parametrize('num_qubits', [1, 2, 3])
    def test_symmetry_and_triangle_inequality(self, num_qubits):
        rng = np.random.default_rng(num_qubits)
        for _ in range(50):
            a, b, c = (random_density(rng, num_qubits) for _ in range(3))
            assert qsim.trace_distance(a, b) == pytest.approx(qsim.trace_distance(b, a), abs=1e-12)
            assert qsim.trace_distance(a, c) <= qsim.trace_distance(a, b) + qsim.trace_distance(b, c) + 1e-12

    def test_zero_only_for_equal_states(self):
        rng = np.random.default_rng(21)
        a, b = random_density(rng, 2), random_density(rng, 2)
        assert qsim.trace_distance(a, qsim.DensityMatrix(a.data.copy())) == pytest.approx(0.0, abs=1e-12)
        assert qsim.trace_distance(a, b) > 1e-6

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(22)
        with pytest.raises(ParameterError):
            qsim.trace_distance(random_density(rng, 1), random_density(rng, 2))


class TestToDensity:
    def test_plus(self):
        rho = qsim.to_density(qsim.prepare_bb84(bitops.from_str('0'), bitops.from_str('1')))
        assert np.allclose(rho.data, np.full((2, 2), 0.5))

    def test_one_tensor_plus(self):
        rho = qsim.to_density(qsim.prepare_bb84(bitops.from_str('10'), bitops.from_str('01')))
        expected = np.zeros((4, 4))
        expected[2:, 2:] = 0.5
        assert np.allclose(rho.data, expected)


class TestMismatchStatistics:
    def test_mismatched_basis_outcomes_are_uniform(self):
        rng = np.random.default_rng(31)
        n = 100000
        x = bitops.random_bits(rng, n)
        theta = bitops.random_bits(rng, n)
        basis = bitops.random_bits(rng, n)
        outcomes = qsim.measure(qsim.prepare_bb84(x, theta), basis, rng)
        matched = basis == theta
        assert np.array_equal(outcomes[matched], x[matched])
        errors = outcomes[~matched] != x[~matched]
        counts = np.array([errors.sum(), (~errors).sum()])
        assert chisquare(counts).pvalue > 1e-3

    def test_mismatch_rate_is_the_same_on_every_position(self):
        rng = np.random.default_rng(32)
        lam, trials = 8, 12500
        errors = np.zeros(lam, dtype=np.int64)
        for _ in range(trials):
            x = bitops.random_bits(rng, lam)
            theta = bitops.random_bits(rng, lam)
            outcomes = qsim.measure(qsim.prepare_bb84(x, theta), np.zeros(lam, dtype=np.uint8), rng)
            errors += outcomes != x
        # 计算基测量：θ_i = 1 的位置以 1/2 出错，总体每个位置 1/4
        assert chisquare(errors).pvalue > 1e-3
        assert abs(errors.sum() / (lam * trials) - 0.25) < binomial_slack(0.25, lam * trials)
