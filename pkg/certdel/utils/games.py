"""
可执行的安全实验

每个 run_* 对 b = 0 和 b = 1 各跑 cfg.trials 次实验，统计 b′ = 1 的频率并给出 99% 区间。
实验编号 j 的随机源由 SeedSequence(seed, spawn_key=(j,)) 派生，挑战者和对手各取一个孙序列，
因此结果与执行顺序、并行度无关。

对手只能看到 Stage1View（Z、公开算法与参数、预算）、预言机应答、挑战和（⊥ 或 K），
X、Y 与挑战比特 b 从不越过这个边界。
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple
import logging
import math

import numpy as np
from scipy.stats import norm

from ..exceptions import (
    LengthMismatchError, OracleBudgetExceeded, OracleForbidden, ParameterError, RegisterConsumedError,
)
from . import bits as bitops
from .dem import Dem, OTP, STREAM_KEY_BITS
from .demcd import DemCd, DEFAULT_MODE, VRFY_MODES
from .ikem import Ikem
from .phecd import PheCd

logger = logging.getLogger(__name__)

IKIND = 'ikind'
IND_OT_DEM = 'ind-ot-dem'
IND_QE_CPA = 'ind-qe-cpa'
EV_CD_DEMCD = 'ev-cd-demcd'
EV_QE_CD = 'ev-qe-cd'
GAMES = (IKIND, IND_OT_DEM, IND_QE_CPA, EV_CD_DEMCD, EV_QE_CD)
DELETION_GAMES = (EV_CD_DEMCD, EV_QE_CD)

CONFIDENCE = 0.99


@dataclass(frozen=True)
class GameConfig:
    trials: int = 10000
    q_e: int = 0
    seed: int = 0
    vrfy_mode: str = DEFAULT_MODE
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError(f"trials 至少为 1，得到 {self.trials}")
        if self.q_e < 0:
            raise ParameterError(f"q_e 不能为负，得到 {self.q_e}")
        if self.vrfy_mode not in VRFY_MODES:
            raise ParameterError(f"未知验证模式: {self.vrfy_mode}")
        if self.workers < 1:
            raise ParameterError(f"workers 至少为 1，得到 {self.workers}")


@dataclass(frozen=True)
class Stage1View:
    """第一阶段对手能看到的全部内容"""
    game: str
    scheme: Any
    z: Optional[np.ndarray] = None
    q_e: int = 0
    vrfy_mode: str = DEFAULT_MODE


@dataclass(frozen=True)
class KemChallenge:
    """IKIND 的挑战 (C*, K*)"""
    capsule: Any
    key: np.ndarray


class BudgetedOracle:
    """至多回答 budget 次；第 budget + 1 次调用抛 OracleBudgetExceeded"""

    def __init__(self, answer: Optional[Callable[..., Any]], budget: int, name: str = 'oracle'):
        self._answer = answer
        self.budget = budget
        self.name = name
        self.calls = 0

    def __call__(self, *args, **kwargs):
        if self._answer is None:
            raise OracleForbidden(f"{self.name}: 该游戏不允许预言机查询")
        if self.calls >= self.budget:
            raise OracleBudgetExceeded(f"{self.name}: 超出查询预算 q_e = {self.budget}")
        self.calls += 1
        return self._answer(*args, **kwargs)

    @classmethod
    def forbidden(cls, name: str = 'oracle') -> 'BudgetedOracle':
        return cls(None, 0, name)


class Adversary:
    """
    两阶段对手

    choose(view, oracle, rng) -> (messages, st)
    respond(st, challenge, rng) -> (cert, st)      仅删除类游戏
    guess(st, payload, rng) -> b′                  payload 为挑战（不可区分游戏）或 ⊥/K（删除游戏）
    """

    name = 'adversary'
    games: Tuple[str, ...] = ()

    def choose(self, view: Stage1View, oracle: BudgetedOracle, rng: np.random.Generator):
        return None, {}

    def respond(self, st, challenge, rng: np.random.Generator):
        raise NotImplementedError

    def guess(self, st, payload, rng: np.random.Generator) -> int:
        raise NotImplementedError

    def descriptor(self, lam: int = 3):
        """λ 个比特时对应的 oracle.StrategyDescriptor；没有对应策略时为 None"""
        return None

    @property
    def view_optimal(self) -> bool:
        """第二阶段是否对其视图做最优（最大似然）判断"""
        return False

    def supports(self, game: str) -> bool:
        return game in self.games


@dataclass(frozen=True)
class TrialOutcome:
    b: int
    guess: int = 0
    accepted: Optional[bool] = None
    aborted: bool = False


@dataclass
class AdvantageEstimate:
    """|Pr[b′=1 | b=0] − Pr[b′=1 | b=1]| 的点估计和 99% 区间；删除类游戏另有接受率"""
    advantage: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    half_width: Optional[float]
    ones: Tuple[int, int]
    counts: Tuple[int, int]
    trials: int = 0
    aborted: int = 0
    acceptance: Optional[float] = None
    acceptance_ci: Optional[Tuple[float, float]] = None
    accepted: Optional[Tuple[int, int]] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def contains_zero(self) -> bool:
        return self.ci_low is not None and self.ci_low <= 0.0

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['ones'] = list(self.ones)
        data['counts'] = list(self.counts)
        if self.acceptance_ci is not None:
            data['acceptance_ci'] = list(self.acceptance_ci)
        if self.accepted is not None:
            data['accepted'] = list(self.accepted)
        return data


def wilson_interval(successes: int, total: int, confidence: float = CONFIDENCE) -> Tuple[float, float]:
    """Wilson 得分区间"""
    if total < 1:
        raise ParameterError("零次试验的分支无法估计")
    z = norm.ppf(0.5 + confidence / 2)
    p = successes / total
    denominator = 1 + z * z / total
    center = (p + z * z / (2 * total)) / denominator
    half = z / denominator * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total))
    return max(0.0, center - half), min(1.0, center + half)


def estimate(ones0: int, n0: int, ones1: int, n1: int, confidence: float = CONFIDENCE) -> AdvantageEstimate:
    """
    两个独立比例之差的估计

    每个分支用 Wilson 区间，差值用 Newcombe 组合；报告的区间针对 |差值|，跨过 0 时下界取 0。

    Args:
        ones0, n0: b = 0 分支中 b′ = 1 的次数与总次数
        ones1, n1: b = 1 分支

    Returns:
        AdvantageEstimate
    """
    if n0 < 1 or n1 < 1:
        raise ParameterError(f"每个分支至少需要 1 次试验: n0 = {n0}, n1 = {n1}")
    p0, p1 = ones0 / n0, ones1 / n1
    l0, u0 = wilson_interval(ones0, n0, confidence)
    l1, u1 = wilson_interval(ones1, n1, confidence)
    difference = p0 - p1
    lower = difference - math.sqrt((p0 - l0) ** 2 + (u1 - p1) ** 2)
    upper = difference + math.sqrt((u0 - p0) ** 2 + (p1 - l1) ** 2)
    if lower >= 0:
        ci = (lower, upper)
    elif upper <= 0:
        ci = (-upper, -lower)
    else:
        ci = (0.0, max(-lower, upper))
    return AdvantageEstimate(
        advantage=abs(difference),
        ci_low=max(0.0, ci[0]),
        ci_high=min(1.0, ci[1]),
        half_width=(upper - lower) / 2,
        ones=(ones0, ones1),
        counts=(n0, n1),
    )


def composition_bound(ikem_distance: float, dem_advantage: float) -> float:
    """混合论证给出的组合上界 min(1, 2·SD + Adv_DEM)"""
    return min(1.0, 2.0 * ikem_distance + dem_advantage)


def trial_rngs(seed: int, index: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """实验 index 的 (挑战者, 对手) 随机源"""
    challenger, adversary = np.random.SeedSequence(seed, spawn_key=(index,)).spawn(2)
    return np.random.default_rng(challenger), np.random.default_rng(adversary)


def coin(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2))


def _same_length_messages(messages) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    if messages is None or len(messages) != 2:
        return None
    m0, m1 = bitops.as_bits(messages[0]), bitops.as_bits(messages[1])
    if len(m0) != len(m1) or len(m0) < 1:
        return None
    return m0, m1


class GameRunner:
    """执行实验并汇总结果"""

    def __init__(self, cfg: GameConfig):
        self.cfg = cfg
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def _check(self, game: str, adversary: Adversary) -> None:
        if not adversary.supports(game):
            raise ParameterError(f"对手 {adversary.name} 不适用于游戏 {game}")

    def _execute(self, trial: Callable[[int, int], TrialOutcome]) -> List[TrialOutcome]:
        total = 2 * self.cfg.trials

        def run(index: int) -> TrialOutcome:
            b = 0 if index < self.cfg.trials else 1
            try:
                return trial(index, b)
            except OracleBudgetExceeded as e:
                self.logger.warning(f"实验 {index} 中止: {e}")
                return TrialOutcome(b, aborted=True)

        if self.cfg.workers == 1:
            return [run(index) for index in range(total)]
        with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
            return list(pool.map(run, range(total)))

    def _summarize(self, game: str, outcomes: List[TrialOutcome], deletion: bool) -> AdvantageEstimate:
        aborted = sum(1 for o in outcomes if o.aborted)
        valid = [o for o in outcomes if not o.aborted]
        counts = [sum(1 for o in valid if o.b == b) for b in (0, 1)]
        if not deletion:
            ones = [sum(o.guess for o in valid if o.b == b) for b in (0, 1)]
            if min(counts) == 0:
                raise ParameterError(f"{game}: 所有实验都被中止，无法估计")
            result = estimate(ones[0], counts[0], ones[1], counts[1])
        else:
            accepted = [sum(1 for o in valid if o.b == b and o.accepted) for b in (0, 1)]
            ones = [sum(o.guess for o in valid if o.b == b and o.accepted) for b in (0, 1)]
            if min(counts) == 0:
                raise ParameterError(f"{game}: 所有实验都被中止，无法估计")
            if min(accepted) > 0:
                result = estimate(ones[0], accepted[0], ones[1], accepted[1])
            else:
                self.logger.warning(f"{game}: 某个分支没有被接受的证书，条件优势无法估计")
                result = AdvantageEstimate(None, None, None, None, tuple(ones), tuple(accepted))
            total_valid = counts[0] + counts[1]
            total_accepted = accepted[0] + accepted[1]
            result.acceptance = total_accepted / total_valid
            result.acceptance_ci = wilson_interval(total_accepted, total_valid)
            result.accepted = tuple(accepted)
        result.trials = self.cfg.trials
        result.aborted = aborted
        if aborted:
            self.logger.warning(f"{game}: {aborted} 次实验因预算违规被中止")
        return result

    def _finish(self, game: str, adversary: Adversary, outcomes: List[TrialOutcome], deletion: bool):
        result = self._summarize(game, outcomes, deletion)
        self.logger.info(
            f"{game} / {adversary.name}: 优势 {result.advantage}, 区间 [{result.ci_low}, {result.ci_high}]"
            + (f", 接受率 {result.acceptance:.4f}" if result.acceptance is not None else '')
        )
        return result

    def run_ikind(self, ikem: Ikem, adversary: Adversary) -> AdvantageEstimate:
        """IKIND：b = 0 给真实 K*，b = 1 给均匀 K̂"""
        self._check(IKIND, adversary)
        cfg = self.cfg

        def trial(index: int, b: int) -> TrialOutcome:
            rng_c, rng_a = trial_rngs(cfg.seed, index)
            triple = ikem.gen(rng_c)
            oracle = BudgetedOracle(lambda: ikem.encap(triple.x, rng_c), cfg.q_e, 'encap')
            view = Stage1View(IKIND, ikem, triple.z, cfg.q_e, cfg.vrfy_mode)
            _, st = adversary.choose(view, oracle, rng_a)
            key, capsule = ikem.encap(triple.x, rng_c)
            if b == 1:
                key = bitops.random_bits(rng_c, ikem.params.key_len)
            return TrialOutcome(b, int(adversary.guess(st, KemChallenge(capsule, key), rng_a)))

        return self._finish(IKIND, adversary, self._execute(trial), deletion=False)

    def run_ind_ot_dem(self, dem: Dem, adversary: Adversary) -> AdvantageEstimate:
        """一次性 IND：不允许任何预言机查询"""
        self._check(IND_OT_DEM, adversary)
        cfg = self.cfg

        def trial(index: int, b: int) -> TrialOutcome:
            rng_c, rng_a = trial_rngs(cfg.seed, index)
            view = Stage1View(IND_OT_DEM, dem, None, 0, cfg.vrfy_mode)
            messages, st = adversary.choose(view, BudgetedOracle.forbidden('dem'), rng_a)
            pair = _same_length_messages(messages)
            if pair is None:
                self.logger.warning(f"实验 {index}: 消息对非法，作废")
                return TrialOutcome(b, aborted=True)
            key = dem.gen(len(pair[0]) if dem.variant == OTP else STREAM_KEY_BITS, rng_c)
            ciphertext = dem.encap(key, pair[b], rng_c)
            return TrialOutcome(b, int(adversary.guess(st, ciphertext, rng_a)))

        return self._finish(IND_OT_DEM, adversary, self._execute(trial), deletion=False)

    def run_ind_qe_cpa(self, phecd: PheCd, adversary: Adversary) -> AdvantageEstimate:
        """组合方案的 IND-q_e-CPA；第二阶段只拿到挑战密文"""
        self._check(IND_QE_CPA, adversary)
        cfg = self.cfg

        def trial(index: int, b: int) -> TrialOutcome:
            rng_c, rng_a = trial_rngs(cfg.seed, index)
            triple = phecd.keygen(rng_c)
            oracle = BudgetedOracle(lambda m: phecd.enc(triple.x, m, rng_c)[1], cfg.q_e, 'enc')
            view = Stage1View(IND_QE_CPA, phecd, triple.z, cfg.q_e, cfg.vrfy_mode)
            messages, st = adversary.choose(view, oracle, rng_a)
            pair = _same_length_messages(messages)
            if pair is None:
                self.logger.warning(f"实验 {index}: 消息对非法，作废")
                return TrialOutcome(b, aborted=True)
            _, ct = phecd.enc(triple.x, pair[b], rng_c)
            return TrialOutcome(b, int(adversary.guess(st, ct, rng_a)))

        return self._finish(IND_QE_CPA, adversary, self._execute(trial), deletion=False)

    def run_ev_cd_demcd(self, demcd: DemCd, adversary: Adversary) -> AdvantageEstimate:
        """一次性永久可认证删除实验：验证通过才把 K 交给第二阶段"""
        self._check(EV_CD_DEMCD, adversary)
        cfg = self.cfg

        def trial(index: int, b: int) -> TrialOutcome:
            rng_c, rng_a = trial_rngs(cfg.seed, index)
            view = Stage1View(EV_CD_DEMCD, demcd, None, 0, cfg.vrfy_mode)
            messages, st = adversary.choose(view, BudgetedOracle.forbidden('demcd'), rng_a)
            pair = _same_length_messages(messages)
            if pair is None:
                self.logger.warning(f"实验 {index}: 消息对非法，作废")
                return TrialOutcome(b, aborted=True)
            key = demcd.gen(rng_c, len(pair[0]))
            vks, c2s = demcd.encap_multi(key, pair[b], rng_c)
            certs, st = adversary.respond(st, c2s, rng_a)
            accepted = _checked(lambda: demcd.verify_multi(vks, certs, cfg.vrfy_mode))
            release = [key] if accepted else None
            return TrialOutcome(b, int(adversary.guess(st, release, rng_a)), accepted)

        return self._finish(EV_CD_DEMCD, adversary, self._execute(trial), deletion=True)

    def run_ev_qe_cd(self, phecd: PheCd, adversary: Adversary) -> AdvantageEstimate:
        """
        EV-q_e-CD 八步实验

        第一阶段拿到 Z 和至多 q_e 次加密预言机应答，提交 (m0, m1)，收到 CT 后给出证书；
        挑战者验证，⊤ 时释放 K（per_bit_capsule 模式下是每个封装的密钥列表）。
        """
        self._check(EV_QE_CD, adversary)
        cfg = self.cfg

        def trial(index: int, b: int) -> TrialOutcome:
            rng_c, rng_a = trial_rngs(cfg.seed, index)
            triple = phecd.keygen(rng_c)
            oracle = BudgetedOracle(lambda m: phecd.enc(triple.x, m, rng_c)[1], cfg.q_e, 'enc')
            view = Stage1View(EV_QE_CD, phecd, triple.z, cfg.q_e, cfg.vrfy_mode)
            messages, st = adversary.choose(view, oracle, rng_a)
            pair = _same_length_messages(messages)
            if pair is None:
                self.logger.warning(f"实验 {index}: 消息对非法，作废")
                return TrialOutcome(b, aborted=True)
            vks, ct, keys = phecd.enc_with_keys(triple.x, pair[b], rng_c)
            certs, st = adversary.respond(st, ct, rng_a)
            accepted = _checked(lambda: phecd.verify(vks, certs, cfg.vrfy_mode))
            # 释放加密时封装出的 K，不从对手手里的 CT 重算
            release = keys if accepted else None
            return TrialOutcome(b, int(adversary.guess(st, release, rng_a)), accepted)

        return self._finish(EV_QE_CD, adversary, self._execute(trial), deletion=True)


def _checked(verify: Callable[[], bool]) -> bool:
    """证书长度不符或寄存器已被消耗时按拒绝处理"""
    try:
        return verify()
    except (LengthMismatchError, RegisterConsumedError):
        return False


def run_ikind(ikem: Ikem, adversary: Adversary, cfg: GameConfig) -> AdvantageEstimate:
    return GameRunner(cfg).run_ikind(ikem, adversary)


def run_ind_ot_dem(dem: Dem, adversary: Adversary, cfg: GameConfig) -> AdvantageEstimate:
    return GameRunner(cfg).run_ind_ot_dem(dem, adversary)


def run_ind_qe_cpa(phecd: PheCd, adversary: Adversary, cfg: GameConfig) -> AdvantageEstimate:
    return GameRunner(cfg).run_ind_qe_cpa(phecd, adversary)


def run_ev_cd_demcd(demcd: DemCd, adversary: Adversary, cfg: GameConfig) -> AdvantageEstimate:
    return GameRunner(cfg).run_ev_cd_demcd(demcd, adversary)


def run_ev_qe_cd(phecd: PheCd, adversary: Adversary, cfg: GameConfig) -> AdvantageEstimate:
    return GameRunner(cfg).run_ev_qe_cd(phecd, adversary)


def builtin_adversaries() -> Dict[str, Adversary]:
    """内置对手目录（名称 -> 实例）"""
    from .adversaries import catalog
    return catalog()
