import json
import math

import pytest

from certdel.exceptions import ParameterError
from certdel.utils import oracle
from certdel.utils.demcd import DEFAULT_MODE, STRICT_MODE
from certdel.utils.oracle import StrategyDescriptor, menu_descriptor

C2 = math.cos(math.pi / 8) ** 2


def closed_form(name, lam):
    """默认验证模式下 (接受率, 条件距离) 的闭式解"""
    forms = {
        'honest-deleter': (1.0, 2.0 ** -lam),
        'measure-computational': (0.75 ** lam, 1.0),
        'keep-and-forge': (0.75 ** lam, 1.0),
        'random-guess': (0.75 ** lam, 3.0 ** -lam),
        'intercept-resend': (0.875 ** lam, (5 / 7) ** lam),
        'breidbart': (((1 + C2) / 2) ** lam, ((C2 + math.sqrt(0.5)) / (1 + C2)) ** lam),
    }
    return forms[name]


MENU_NAMES = [entry[0] for entry in oracle.MENU]


class TestExactJoint:
    @pytest.mark.parametrize('lam', [1, 2, 3])
    @pytest.mark.parametrize('name', MENU_NAMES)
    def test_closed_forms(self, name, lam):
        acceptance, distance = oracle.exact_joint(menu_descriptor(name, lam), lam)
        expected_acceptance, expected_distance = closed_form(name, lam)
        assert acceptance == pytest.approx(expected_acceptance, abs=1e-10)
        assert distance == pytest.approx(expected_distance, abs=1e-10)

    @pytest.mark.parametrize('lam', [1, 2, 3])
    def test_strict_mode_honest_deleter(self, lam):
        acceptance, distance = oracle.exact_joint(menu_descriptor('honest-deleter', lam), lam, STRICT_MODE)
        assert acceptance == pytest.approx(0.75 ** lam, abs=1e-10)
        assert distance == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize('mode', [DEFAULT_MODE, STRICT_MODE])
    @pytest.mark.parametrize('lam', [1, 2, 3])
    @pytest.mark.parametrize('name', MENU_NAMES)
    def test_product_formula_agrees(self, name, lam, mode):
        strategy = menu_descriptor(name, lam)
        exact = oracle.exact_joint(strategy, lam, mode)
        assert oracle.product_formula(strategy, lam, mode) == pytest.approx(exact, abs=1e-9)

    def test_mixed_bases(self):
        strategy = StrategyDescriptor('mixed', ('hadamard', 'computational'), oracle.SUBMIT)
        acceptance, distance = oracle.exact_joint(strategy, 2)
        assert acceptance == pytest.approx(1.0 * 0.75)
        assert oracle.product_formula(strategy, 2) == pytest.approx((acceptance, distance), abs=1e-9)

    def test_lambda_out_of_range(self):
        with pytest.raises(ParameterError):
            oracle.exact_joint(menu_descriptor('honest-deleter', 4), 4)
        with pytest.raises(ParameterError):
            oracle.tradeoff_table(0)

    def test_descriptor_length_must_match(self):
        with pytest.raises(ParameterError):
            oracle.exact_joint(menu_descriptor('honest-deleter', 2), 3)

    def test_stream_dem_has_no_exact_distance(self):
        with pytest.raises(ParameterError):
            oracle.exact_post_verification_distance(menu_descriptor('breidbart', 2), 2, dem_variant='stream')

    def test_invalid_descriptor(self):
        with pytest.raises(ParameterError):
            StrategyDescriptor('bad', ('diagonal',), oracle.SUBMIT)
        with pytest.raises(ParameterError):
            StrategyDescriptor('bad', ('hadamard',), 'copy')
        with pytest.raises(ParameterError):
            menu_descriptor('no-such-strategy', 2)

    def test_random_certificate_acceptance(self):
        assert oracle.exact_cert_acceptance(menu_descriptor('random-guess', 3), 3) == pytest.approx(0.75 ** 3)


class TestTradeoffTable:
    def test_sorted_by_acceptance(self):
        table = oracle.tradeoff_table(2)
        assert list(table.columns) == ['strategy', 'lambda', 'acceptance', 'distance']
        assert len(table) == len(oracle.MENU)
        assert table['acceptance'].round(12).is_monotonic_decreasing
        assert table.iloc[0]['strategy'] == 'honest-deleter'
        # 接受率相同的按名称排序
        tied = table[table['acceptance'].round(12) == round(0.75 ** 2, 12)]['strategy'].tolist()
        assert tied == sorted(tied)

    def test_empty_menu(self):
        with pytest.raises(ParameterError):
            oracle.tradeoff_table(1, menu=[])

    def test_records_are_rounded(self):
        records = oracle.table_records(oracle.tradeoff_table(1))
        assert {r['strategy'] for r in records} == set(MENU_NAMES)
        breidbart = next(r for r in records if r['strategy'] == 'breidbart')
        assert breidbart['acceptance'] == pytest.approx((1 + C2) / 2, abs=1e-12)


class TestGolden:
    def test_render_is_deterministic(self):
        assert oracle.render_golden(2) == oracle.render_golden(2)
        assert oracle.render_golden(2).endswith('\n')

    @pytest.mark.parametrize('mode', [DEFAULT_MODE, STRICT_MODE])
    def test_write_then_check(self, tmp_path, mode):
        path = oracle.write_golden(tmp_path, 1, mode)
        assert path.name == f"oracle_lambda1_{mode}.json"
        assert oracle.check_golden(tmp_path, 1, mode) == []

    def test_check_reports_changed_rows(self, tmp_path):
        path = oracle.write_golden(tmp_path, 1)
        records = json.loads(path.read_text(encoding='utf-8'))
        records[0]['distance'] = 0.123
        path.write_text(json.dumps(records, indent=2, sort_keys=True) + '\n', encoding='utf-8')
        differences = oracle.check_golden(tmp_path, 1)
        assert len(differences) == 1
        assert differences[0].startswith(records[0]['strategy'])

    def test_missing_golden_file(self, tmp_path):
        assert len(oracle.check_golden(tmp_path, 3)) == 1
