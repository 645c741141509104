import math

import numpy as np
import pytest

from certdel.utils import games, oracle
from certdel.utils.adversaries import decide
from certdel.utils.demcd import STRICT_MODE
from certdel.utils.games import GameConfig, builtin_adversaries
from certdel.utils.presets import build_components, preset_values

LAM = 3


@pytest.fixture(scope='module')
def demcd():
    values = preset_values('oracle')
    assert values['lam'] == LAM
    return build_components(values).demcd


def difference_sigma(result):
    variance = 0.0
    for ones, count in zip(result.ones, result.counts):
        q = ones / count
        variance += q * (1 - q) / count
    return math.sqrt(variance)


class TestDecide:
    def test_single_bit(self):
        rng = np.random.default_rng(0)
        m0, m1 = np.array([0], dtype=np.uint8), np.array([1], dtype=np.uint8)
        assert decide(m0, m1, [(0, 0.5)], rng) == 0
        assert decide(m0, m1, [(1, 0.5)], rng) == 1
        assert decide(m0, m1, [(1, 1.0)], rng) == 1

    def test_strongest_evidence_wins(self):
        rng = np.random.default_rng(0)
        m0 = np.array([0, 0], dtype=np.uint8)
        m1 = np.array([1, 1], dtype=np.uint8)
        assert decide(m0, m1, [(0, 0.9), (1, 0.2)], rng) == 0

    def test_ties_are_fair(self):
        rng = np.random.default_rng(1)
        m0, m1 = np.array([0], dtype=np.uint8), np.array([1], dtype=np.uint8)
        guesses = [decide(m0, m1, [(0, 0.0)], rng) for _ in range(2000)]
        assert 0.4 < np.mean(guesses) < 0.6


class TestCatalog:
    @pytest.mark.parametrize('name', [entry[0] for entry in oracle.MENU])
    def test_menu_strategies_have_descriptors(self, name):
        adversary = builtin_adversaries()[name]
        descriptor = adversary.descriptor(LAM)
        assert descriptor.name == name
        assert descriptor.lam == LAM

    def test_non_menu_adversaries(self):
        catalog = builtin_adversaries()
        for name in ('eve-knows-x', 'bayes-key', 'bit-frequency', 'xor-correlation'):
            assert catalog[name].descriptor(LAM) is None

    def test_view_optimal_flags(self):
        catalog = builtin_adversaries()
        assert catalog['breidbart'].view_optimal
        assert catalog['bayes-key'].view_optimal
        assert not catalog['random-guess'].view_optimal

    def test_game_support(self):
        catalog = builtin_adversaries()
        assert catalog['bayes-key'].games == (games.IKIND,)
        assert catalog['keep-and-forge'].supports(games.EV_QE_CD)
        assert not catalog['breidbart'].supports(games.IND_QE_CPA)


class TestAgreementWithOracle:
    """
    ev-cd-demcd 的蒙特卡罗估计与精确引擎比较

    接受率和条件优势都应落在精确值的 4σ 内；σ 由各分支计数估计。
    """

    @pytest.mark.parametrize('name', [
        'honest-deleter', 'measure-computational', 'breidbart', 'intercept-resend', 'keep-and-forge',
    ])
    def test_view_optimal_strategies(self, demcd, name):
        adversary = builtin_adversaries()[name]
        acceptance, distance = oracle.exact_joint(adversary.descriptor(LAM), LAM)
        result = games.run_ev_cd_demcd(demcd, adversary, GameConfig(trials=4000, seed=31))

        total = 2 * result.trials
        assert abs(result.acceptance - acceptance) <= 4 * math.sqrt(acceptance * (1 - acceptance) / total) + 1e-9
        assert abs(result.advantage - distance) <= 4 * difference_sigma(result) + 0.01

    def test_discard_is_bounded(self, demcd):
        adversary = builtin_adversaries()['random-guess']
        acceptance, distance = oracle.exact_joint(adversary.descriptor(LAM), LAM)
        result = games.run_ev_cd_demcd(demcd, adversary, GameConfig(trials=4000, seed=32))
        total = 2 * result.trials
        assert abs(result.acceptance - acceptance) <= 4 * math.sqrt(acceptance * (1 - acceptance) / total)
        assert result.advantage <= distance + result.half_width

    def test_strict_mode(self, demcd):
        adversary = builtin_adversaries()['honest-deleter']
        acceptance, distance = oracle.exact_joint(adversary.descriptor(LAM), LAM, STRICT_MODE)
        result = games.run_ev_cd_demcd(demcd, adversary, GameConfig(trials=4000, seed=33, vrfy_mode=STRICT_MODE))
        total = 2 * result.trials
        assert abs(result.acceptance - acceptance) <= 4 * math.sqrt(acceptance * (1 - acceptance) / total)
        assert distance == pytest.approx(1.0)
        assert result.advantage == 1.0
