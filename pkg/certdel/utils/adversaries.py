"""
内置对手目录

删除类策略（除 random-guess 外）的第二阶段都对自己的视图做最大似然判断：
拿到 K 后解出 (θ, m′)，用每个 θ_i = 0 比特的后验偏差推断掩码奇偶性；
保留寄存器的策略直接在 θ 基下测量。因此它们的条件优势估计的正是 oracle 给出的精确迹距离。
"""
from typing import Dict, List, Optional, Tuple
import logging
import math

import numpy as np

from . import bits as bitops
from . import qsim
from .demcd import Certificate, DemCd, DemCdCiphertext, STRICT_MODE, mask_bit
from .games import (
    Adversary, KemChallenge, Stage1View, coin,
    EV_CD_DEMCD, EV_QE_CD, GAMES, IKIND, IND_OT_DEM, IND_QE_CPA,
)
from .ikem import key_posterior
from .oracle import (
    BASIS_ANGLES, DISCARD, KEEP, RESEND, SUBMIT, StrategyDescriptor, menu_descriptor,
)
from .phecd import HybridCiphertext, PheCd

logger = logging.getLogger(__name__)

SINGLE_BIT_PAIR = (np.array([0], dtype=np.uint8), np.array([1], dtype=np.uint8))


def scheme_demcd(scheme) -> DemCd:
    return scheme.demcd if isinstance(scheme, PheCd) else scheme


def payloads(challenge) -> List[DemCdCiphertext]:
    return list(challenge.c2) if isinstance(challenge, HybridCiphertext) else list(challenge)


def bit_keys(scheme, release: List[np.ndarray], count: int) -> List[np.ndarray]:
    """把释放的 K（或每个封装的 K）切成逐比特 DEM-CD 密钥"""
    demcd = scheme_demcd(scheme)
    if isinstance(scheme, PheCd) and scheme.per_bit_capsule:
        return [demcd.key_slice(key, 0) for key in release]
    return [demcd.key_slice(release[0], index) for index in range(count)]


def decide(m0: np.ndarray, m1: np.ndarray, estimates: List[Tuple[int, float]],
           rng: np.random.Generator) -> int:
    """
    最大似然选择 b′

    estimates[i] = (猜测的 m_i, 置信偏差 |P(m_i=v) − P(m_i=1−v)|)；平局抛硬币。
    """
    score = 0.0
    for index, (value, bias) in enumerate(estimates):
        if m0[index] == m1[index] or bias <= 0.0:
            continue
        bias = min(bias, 1.0 - 1e-15)
        weight = math.log((1 + bias) / (1 - bias))
        score += weight if value == m0[index] else -weight
    if abs(score) < 1e-12:
        return coin(rng)
    return 0 if score > 0 else 1


class PerQubitAdversary(Adversary):
    """
    逐比特测量策略，对应 oracle 菜单中的一项

    Args:
        name: 目录名
        basis: computational / hadamard / breidbart / random
        rule: submit / resend / keep / discard
    """

    games = (EV_CD_DEMCD, EV_QE_CD)

    def __init__(self, name: str, basis: str, rule: str):
        self.name = name
        self.basis = basis
        self.rule = rule

    def descriptor(self, lam: int = 3) -> StrategyDescriptor:
        return menu_descriptor(self.name, lam)

    @property
    def view_optimal(self) -> bool:
        return self.rule != DISCARD

    def choose(self, view: Stage1View, oracle, rng):
        return SINGLE_BIT_PAIR, {'scheme': view.scheme, 'mode': view.vrfy_mode,
                                 'messages': SINGLE_BIT_PAIR}

    def _angles(self, lam: int, rng: np.random.Generator) -> np.ndarray:
        angle = BASIS_ANGLES[self.basis]
        if angle is None:
            return 2 * rng.integers(0, 2, size=lam)
        return np.full(lam, angle, dtype=np.int64)

    def respond(self, st, challenge, rng):
        records, certs = [], []
        for c2 in payloads(challenge):
            lam = c2.qpart.num_qubits
            if self.rule == KEEP:
                records.append({'register': c2.qpart})
                certs.append(Certificate(np.zeros(lam, dtype=np.uint8)))
            elif self.rule == DISCARD:
                records.append({})
                certs.append(Certificate(bitops.random_bits(rng, lam)))
            else:
                angles = self._angles(lam, rng)
                outcomes = qsim.measure_in(c2.qpart, angles, rng)
                cert = outcomes
                if self.rule == RESEND:
                    copy = qsim.prepare_states(angles + 4 * outcomes.astype(np.int64))
                    cert = qsim.measure_in(copy, np.full(lam, qsim.HADAMARD), rng)
                records.append({'angles': angles, 'outcomes': outcomes})
                certs.append(Certificate(cert))
        return certs, {**st, 'records': records, 'certs': certs, 'challenge': challenge}

    def guess(self, st, release, rng) -> int:
        if release is None or self.rule == DISCARD:
            return coin(rng)
        m0, m1 = st['messages']
        c2s = payloads(st['challenge'])
        keys = bit_keys(st['scheme'], release, len(c2s))
        demcd = scheme_demcd(st['scheme'])
        estimates = []
        for c2, key, record, cert in zip(c2s, keys, st['records'], st['certs']):
            plaintext = demcd.dem.decap(key, c2.cpart)
            if plaintext is None:
                estimates.append((0, 0.0))
                continue
            theta, masked = plaintext[:demcd.lam], int(plaintext[demcd.lam])
            parity, bias = self._mask_estimate(theta, record, cert, st['mode'], rng)
            estimates.append((masked ^ parity, bias))
        return decide(m0, m1, estimates, rng)

    def _mask_estimate(self, theta: np.ndarray, record: Dict, cert: Certificate,
                       mode: str, rng) -> Tuple[int, float]:
        """掩码奇偶性的最可能取值及其偏差"""
        if self.rule == KEEP:
            x = qsim.measure(record['register'], theta, rng)
            return mask_bit(x, theta), 1.0
        if mode == STRICT_MODE:
            # strict 模式下验证通过意味着证书就是 x
            return mask_bit(np.asarray(cert.bits), theta), 1.0
        parity, bias = 0, 1.0
        for index in np.flatnonzero(theta == 0):
            angle, outcome = int(record['angles'][index]), int(record['outcomes'][index])
            p_given_0 = qsim.outcome_probability(0, angle, outcome)
            p_given_1 = qsim.outcome_probability(4, angle, outcome)
            posterior0 = p_given_0 / (p_given_0 + p_given_1)
            bias *= abs(2 * posterior0 - 1)
            parity ^= 0 if posterior0 >= 0.5 else 1
        return parity, bias


class HonestDeleter(PerQubitAdversary):
    """按方案的 Del 删除，然后尽力猜测"""

    def __init__(self):
        super().__init__('honest-deleter', 'hadamard', SUBMIT)

    def respond(self, st, challenge, rng):
        demcd = scheme_demcd(st['scheme'])
        c2s = payloads(challenge)
        certs = demcd.delete_multi(c2s, rng)
        records = [{'angles': np.full(c2.qpart.num_qubits, qsim.HADAMARD), 'outcomes': cert.bits}
                   for c2, cert in zip(c2s, certs)]
        return certs, {**st, 'records': records, 'certs': certs, 'challenge': challenge}


class RandomGuess(PerQubitAdversary):
    """随机证书、抛硬币猜测；适用于所有游戏"""

    games = GAMES

    def __init__(self):
        super().__init__('random-guess', 'computational', DISCARD)

    def choose(self, view: Stage1View, oracle, rng):
        if view.game == IKIND:
            return None, {}
        return super().choose(view, oracle, rng)

    def guess(self, st, payload, rng) -> int:
        return coin(rng)


class EveKnowsX(Adversary):
    """
    把 Z 当作自己的相关样本去解封装（p_E = 0 时 Z = X）

    IKIND 中比较恢复的密钥与 K*；CPA 中直接解密挑战；EV-q_e-CD 中先恢复 θ 和 x，
    再把 x 当证书提交，验证必然通过。第一阶段会用满 q_e 次预言机查询。
    """

    name = 'eve-knows-x'
    games = (IKIND, IND_QE_CPA, EV_QE_CD)

    @property
    def view_optimal(self) -> bool:
        return False

    def choose(self, view: Stage1View, oracle, rng):
        for _ in range(view.q_e):
            if view.game == IKIND:
                oracle()
            else:
                oracle(SINGLE_BIT_PAIR[0])
        st = {'scheme': view.scheme, 'z': view.z, 'messages': SINGLE_BIT_PAIR}
        return (None if view.game == IKIND else SINGLE_BIT_PAIR), st

    def _match(self, st, message: Optional[np.ndarray], rng) -> int:
        m0, m1 = st['messages']
        if message is not None and np.array_equal(message, m0):
            return 0
        if message is not None and np.array_equal(message, m1):
            return 1
        return coin(rng)

    def respond(self, st, challenge: HybridCiphertext, rng):
        phecd: PheCd = st['scheme']
        demcd = phecd.demcd
        keys = phecd.recover_keys(st['z'], challenge)
        if keys is None:
            return phecd.delete(challenge, rng), {**st, 'message': None}
        certs, message = [], []
        for c2, key in zip(challenge.c2, bit_keys(phecd, keys, len(challenge.c2))):
            plaintext = demcd.dem.decap(key, c2.cpart)
            if plaintext is None:
                certs.append(demcd.delete(c2, rng))
                message = None
                continue
            theta, masked = plaintext[:demcd.lam], int(plaintext[demcd.lam])
            x = qsim.measure(c2.qpart, theta, rng)
            certs.append(Certificate(x))
            if message is not None:
                message.append(masked ^ mask_bit(x, theta))
        recovered = None if message is None else np.array(message, dtype=np.uint8)
        return certs, {**st, 'message': recovered}

    def guess(self, st, payload, rng) -> int:
        scheme = st['scheme']
        if isinstance(payload, KemChallenge):
            key = scheme.decap(st['z'], payload.capsule)
            if key is None:
                return coin(rng)
            return 0 if np.array_equal(key, payload.key) else 1
        if isinstance(payload, HybridCiphertext):
            return self._match(st, scheme.dec(st['z'], payload, rng), rng)
        return self._match(st, st.get('message'), rng)


class BayesKeyDistinguisher(Adversary):
    """小参数下精确计算 P(z, C1, k)，K* 的后验高于均匀时判为真实密钥"""

    name = 'bayes-key'
    games = (IKIND,)

    @property
    def view_optimal(self) -> bool:
        return True

    def choose(self, view: Stage1View, oracle, rng):
        return None, {'ikem': view.scheme, 'z': view.z}

    def guess(self, st, payload: KemChallenge, rng) -> int:
        params = st['ikem'].params
        weights = key_posterior(params, st['z'], payload.capsule)
        total = weights.sum()
        if params.key_len == 0 or total <= 0.0:
            return coin(rng)
        observed = weights[bitops.to_int(payload.key)]
        return 0 if observed > total / 2 ** params.key_len else 1


class BitFrequency(Adversary):
    """m0 全 0、m1 全 1；密文中 1 过半则猜 1"""

    name = 'bit-frequency'
    games = (IND_OT_DEM,)
    length = 64

    def choose(self, view: Stage1View, oracle, rng):
        return (np.zeros(self.length, dtype=np.uint8), np.ones(self.length, dtype=np.uint8)), {}

    def guess(self, st, ciphertext, rng) -> int:
        return int(int(ciphertext.payload.sum()) * 2 > len(ciphertext.payload))


class XorCorrelation(Adversary):
    """m0 全 0、m1 交替 0101；相邻异或为 1 的比例过半则猜 1"""

    name = 'xor-correlation'
    games = (IND_OT_DEM,)
    length = 64

    def choose(self, view: Stage1View, oracle, rng):
        alternating = (np.arange(self.length) % 2).astype(np.uint8)
        return (np.zeros(self.length, dtype=np.uint8), alternating), {}

    def guess(self, st, ciphertext, rng) -> int:
        payload = ciphertext.payload
        transitions = int(np.bitwise_xor(payload[1:], payload[:-1]).sum())
        return int(transitions * 2 > len(payload) - 1)


def catalog() -> Dict[str, Adversary]:
    adversaries = [
        HonestDeleter(),
        RandomGuess(),
        PerQubitAdversary('measure-computational', 'computational', SUBMIT),
        PerQubitAdversary('breidbart', 'breidbart', SUBMIT),
        PerQubitAdversary('intercept-resend', 'random', RESEND),
        PerQubitAdversary('keep-and-forge', 'computational', KEEP),
        EveKnowsX(),
        BayesKeyDistinguisher(),
        BitFrequency(),
        XorCorrelation(),
    ]
    return {adversary.name: adversary for adversary in adversaries}
