"""
λ ≤ 3 的精确枚举引擎

对固定的逐比特策略菜单，枚举全部 (θ, x) 和测量分支，精确计算证书接受率与验证通过后
b = 0 / b = 1 两个联合态之间的迹距离。区分者的视图是 (θ, m′, 对手经典记录, 证书, 残余寄存器)：
在 OTP 变体下 (cpart, K) 是 (θ, m′, K) 的双射重编码且 K 与 b 独立，Z 和 C1 也与 b 独立，
所以这个视图与完整视图 (Z, C1, cpart, K, 残余态) 的迹距离相同。
"""
from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
import json
import logging

import numpy as np
import pandas as pd

from ..exceptions import ParameterError
from . import bits as bitops
from . import qsim
from .dem import OTP
from .demcd import DEFAULT_MODE, STRICT_MODE, VRFY_MODES, mask_bit
from .ikem import exact_key_distance

logger = logging.getLogger(__name__)

MAX_LAMBDA = 3

BASIS_ANGLES = {
    'computational': qsim.COMPUTATIONAL,
    'breidbart': qsim.BREIDBART,
    'hadamard': qsim.HADAMARD,
    'random': None,
}

SUBMIT = 'submit'
RESEND = 'resend'
KEEP = 'keep'
DISCARD = 'discard'
RULES = (SUBMIT, RESEND, KEEP, DISCARD)

GOLDEN_DECIMALS = 12

exact_ikem_sd = exact_key_distance


@dataclass(frozen=True)
class StrategyDescriptor:
    """
    逐比特策略：每个比特一个测量基，外加一个后处理规则

    submit  测量并提交结果作为证书
    resend  测量、重新制备、在 Hadamard 基下测量副本作为证书
    keep    不测量，提交全零证书，保留寄存器
    discard 不测量，提交均匀随机证书
    random 基表示每个比特独立均匀地选计算基或 Hadamard 基（对手记得自己的选择）。
    """
    name: str
    bases: Tuple[str, ...]
    rule: str

    def __post_init__(self):
        unknown = [b for b in self.bases if b not in BASIS_ANGLES]
        if unknown:
            raise ParameterError(f"未知测量基: {unknown}")
        if self.rule not in RULES:
            raise ParameterError(f"未知后处理规则: {self.rule}")

    @classmethod
    def uniform(cls, name: str, basis: str, rule: str, lam: int) -> 'StrategyDescriptor':
        return cls(name, tuple([basis] * lam), rule)

    @property
    def lam(self) -> int:
        return len(self.bases)


MENU = (
    ('honest-deleter', 'hadamard', SUBMIT),
    ('measure-computational', 'computational', SUBMIT),
    ('breidbart', 'breidbart', SUBMIT),
    ('intercept-resend', 'random', RESEND),
    ('keep-and-forge', 'computational', KEEP),
    ('random-guess', 'computational', DISCARD),
)


def menu_descriptor(name: str, lam: int) -> StrategyDescriptor:
    for entry_name, basis, rule in MENU:
        if entry_name == name:
            return StrategyDescriptor.uniform(entry_name, basis, rule, lam)
    raise ParameterError(f"策略菜单中没有 {name}")


def default_menu(lam: int) -> List[StrategyDescriptor]:
    return [StrategyDescriptor.uniform(name, basis, rule, lam) for name, basis, rule in MENU]


def _check_lambda(lam: int) -> None:
    if not 1 <= lam <= MAX_LAMBDA:
        raise ParameterError(f"精确引擎只支持 1 ≤ λ ≤ {MAX_LAMBDA}，得到 {lam}")


def _measurement_choices(basis: str) -> List[Tuple[float, int]]:
    angle = BASIS_ANGLES[basis]
    if angle is None:
        return [(0.5, qsim.COMPUTATIONAL), (0.5, qsim.HADAMARD)]
    return [(1.0, angle)]


def qubit_branches(basis: str, rule: str, x: int, theta: int) -> List[Tuple[float, object, int, Optional[np.ndarray]]]:
    """
    单个比特的全部分支 (权重, 经典记录, 证书比特, 残余态)

    残余态只有 keep 规则才有（2×2 密度矩阵）。
    """
    state = int(qsim.bb84_angles(np.array([x]), np.array([theta]))[0])
    if rule == KEEP:
        return [(1.0, KEEP, 0, qsim.qubit_density(state))]
    if rule == DISCARD:
        return [(0.5, None, 0, None), (0.5, None, 1, None)]

    branches = []
    for weight, angle in _measurement_choices(basis):
        for outcome in (0, 1):
            p = qsim.outcome_probability(state, angle, outcome)
            if p == 0.0:
                continue
            if rule == SUBMIT:
                branches.append((weight * p, (angle, outcome), outcome, None))
                continue
            resent = angle + 4 * outcome
            for cert_bit in (0, 1):
                pc = qsim.outcome_probability(resent, qsim.HADAMARD, cert_bit)
                if pc > 0.0:
                    branches.append((weight * p * pc, (angle, outcome), cert_bit, None))
    return branches


def _accepts(cert: Sequence[int], x: np.ndarray, theta: np.ndarray, mode: str) -> bool:
    cert = np.asarray(cert, dtype=np.uint8)
    if mode == STRICT_MODE:
        return bool(np.array_equal(cert, x))
    checked = theta == 1
    return bool(np.array_equal(cert[checked], x[checked]))


def exact_joint(strategy: StrategyDescriptor, lam: int, mode: str = DEFAULT_MODE) -> Tuple[float, float]:
    """
    完整枚举，返回 (接受率, 条件迹距离)

    分块键为 (θ, m′, 记录, 证书)，块内是未归一化的残余态；
    距离 = ½ Σ_blocks ‖ρ⁰ − ρ¹‖₁ / P(接受)，P(接受) = 0 时距离记为 0。
    """
    _check_lambda(lam)
    if strategy.lam != lam:
        raise ParameterError(f"策略长度 {strategy.lam} 与 λ = {lam} 不一致")
    if mode not in VRFY_MODES:
        raise ParameterError(f"未知验证模式: {mode}")

    prior = 4.0 ** (-lam)
    blocks: Dict[tuple, List[np.ndarray]] = defaultdict(lambda: [0.0, 0.0])
    accepted_mass = 0.0
    strings = bitops.all_strings(lam)
    for theta in strings:
        for x in strings:
            parity = mask_bit(x, theta)
            per_qubit = [
                qubit_branches(strategy.bases[i], strategy.rule, int(x[i]), int(theta[i]))
                for i in range(lam)
            ]
            for combo in product(*per_qubit):
                cert = tuple(branch[2] for branch in combo)
                if not _accepts(cert, x, theta, mode):
                    continue
                weight = prior * float(np.prod([branch[0] for branch in combo]))
                accepted_mass += weight
                residual = np.array([[1.0 + 0j]])
                for branch in combo:
                    if branch[3] is not None:
                        residual = np.kron(residual, branch[3])
                base = (tuple(theta.tolist()), tuple(branch[1] for branch in combo), cert)
                for b in (0, 1):
                    blocks[base + (b ^ parity,)][b] = blocks[base + (b ^ parity,)][b] + weight * residual

    if accepted_mass == 0.0:
        return 0.0, 0.0
    total = 0.0
    for pair in blocks.values():
        difference = np.asarray(pair[0]) - np.asarray(pair[1])
        total += qsim.trace_norm(np.atleast_2d(difference))
    distance = min(1.0, 0.5 * total / accepted_mass)
    return float(accepted_mass), float(distance)


def exact_cert_acceptance(strategy: StrategyDescriptor, lam: int, mode: str = DEFAULT_MODE) -> float:
    return exact_joint(strategy, lam, mode)[0]


def exact_post_verification_distance(strategy: StrategyDescriptor, lam: int,
                                     dem_variant: str = OTP, mode: str = DEFAULT_MODE) -> float:
    """验证通过条件下 b = 0 / 1 两个联合态的精确迹距离；只支持信息论 DEM"""
    if dem_variant != OTP:
        raise ParameterError(f"精确距离只对 OTP DEM 有定义，得到 {dem_variant}")
    return exact_joint(strategy, lam, mode)[1]


def qubit_factors(basis: str, rule: str) -> Dict[str, float]:
    """
    单比特因子

    accept      θ=1 时证书比特正确的概率
    bias        θ=0 时 ½Σ_x (−1)^x ρ(x) 在各视图上的迹范数之和
    strict      θ=0 时证书比特正确的概率
    strict_bias 同 bias，但只保留证书比特正确的分支
    """
    factors = {'accept': 0.0, 'bias': 0.0, 'strict': 0.0, 'strict_bias': 0.0}
    for x in (0, 1):
        for weight, _, cert_bit, _ in qubit_branches(basis, rule, x, 1):
            if cert_bit == x:
                factors['accept'] += 0.5 * weight

    signed: Dict[tuple, np.ndarray] = defaultdict(lambda: 0.0)
    signed_strict: Dict[tuple, np.ndarray] = defaultdict(lambda: 0.0)
    for x in (0, 1):
        sign = 1.0 if x == 0 else -1.0
        for weight, record, cert_bit, residual in qubit_branches(basis, rule, x, 0):
            operator = weight * (residual if residual is not None else np.array([[1.0]]))
            signed[(record, cert_bit)] = signed[(record, cert_bit)] + 0.5 * sign * operator
            if cert_bit == x:
                factors['strict'] += 0.5 * weight
                signed_strict[(record, cert_bit)] = signed_strict[(record, cert_bit)] + 0.5 * sign * operator
    factors['bias'] = sum(qsim.trace_norm(np.atleast_2d(op)) for op in signed.values())
    factors['strict_bias'] = sum(qsim.trace_norm(np.atleast_2d(op)) for op in signed_strict.values())
    return factors


def product_formula(strategy: StrategyDescriptor, lam: int, mode: str = DEFAULT_MODE) -> Tuple[float, float]:
    """
    逐比特乘积公式给出 (接受率, 条件距离)

    default: 接受率 Π(1 + a_i)/2，距离 Π(bias_i + a_i) / Π(1 + a_i)
    strict:  接受率 Π(s_i + a_i)/2，距离 Π(sb_i + a_i) / Π(s_i + a_i)
    """
    if strategy.lam != lam:
        raise ParameterError(f"策略长度 {strategy.lam} 与 λ = {lam} 不一致")
    acceptance = 1.0
    numerator = 1.0
    denominator = 1.0
    for basis in strategy.bases:
        f = qubit_factors(basis, strategy.rule)
        if mode == STRICT_MODE:
            theta0_mass, theta0_bias = f['strict'], f['strict_bias']
        else:
            theta0_mass, theta0_bias = 1.0, f['bias']
        acceptance *= (theta0_mass + f['accept']) / 2
        numerator *= theta0_bias + f['accept']
        denominator *= theta0_mass + f['accept']
    if denominator == 0.0:
        return 0.0, 0.0
    return float(acceptance), float(min(1.0, numerator / denominator))


def tradeoff_table(lam: int, menu: Optional[List[StrategyDescriptor]] = None,
                   mode: str = DEFAULT_MODE) -> pd.DataFrame:
    """每个策略一行 (strategy, lambda, acceptance, distance)，按接受率降序"""
    _check_lambda(lam)
    menu = default_menu(lam) if menu is None else menu
    if not menu:
        raise ParameterError("策略菜单不能为空")
    rows = []
    for strategy in menu:
        acceptance, distance = exact_joint(strategy, lam, mode)
        rows.append({'strategy': strategy.name, 'lambda': lam,
                     'acceptance': acceptance, 'distance': distance})
    table = pd.DataFrame(rows, columns=['strategy', 'lambda', 'acceptance', 'distance'])
    # 按舍入后的接受率排序，浮点末位的差异不影响并列项的名称顺序
    table['_key'] = table['acceptance'].round(GOLDEN_DECIMALS)
    table = table.sort_values(['_key', 'strategy'], ascending=[False, True], kind='mergesort')
    logger.info(f"已生成 λ={lam} ({mode}) 的权衡表，共 {len(table)} 个策略")
    return table.drop(columns='_key').reset_index(drop=True)


def table_records(table: pd.DataFrame) -> List[Dict[str, object]]:
    """黄金文件记录；浮点数保留 12 位小数以保证跨平台逐字节一致"""
    return [
        {
            'strategy': str(row.strategy),
            'lambda': int(row['lambda']),
            'acceptance': round(float(row.acceptance), GOLDEN_DECIMALS),
            'distance': round(float(row.distance), GOLDEN_DECIMALS),
        }
        for _, row in table.iterrows()
    ]


def golden_path(directory: Path, lam: int, mode: str) -> Path:
    return Path(directory) / f"oracle_lambda{lam}_{mode}.json"


def render_golden(lam: int, mode: str = DEFAULT_MODE) -> str:
    records = table_records(tradeoff_table(lam, mode=mode))
    return json.dumps(records, indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def write_golden(directory: Path, lam: int, mode: str = DEFAULT_MODE) -> Path:
    path = golden_path(directory, lam, mode)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_golden(lam, mode), encoding='utf-8')
    logger.info(f"黄金文件已写入: {path}")
    return path


def check_golden(directory: Path, lam: int, mode: str = DEFAULT_MODE) -> List[str]:
    """与已提交的黄金文件比较，返回差异描述（空列表表示一致）"""
    path = golden_path(directory, lam, mode)
    if not path.exists():
        return [f"缺少黄金文件 {path}"]
    expected = path.read_text(encoding='utf-8')
    actual = render_golden(lam, mode)
    if expected == actual:
        return []
    old = {r['strategy']: r for r in json.loads(expected)}
    new = {r['strategy']: r for r in json.loads(actual)}
    differences = []
    for name in sorted(set(old) | set(new)):
        if old.get(name) != new.get(name):
            differences.append(f"{name}: {old.get(name)} -> {new.get(name)}")
    return differences or [f"{path} 格式不一致"]
