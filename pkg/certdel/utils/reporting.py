"""
结果输出：JSON 记录与 CSV 导出

所有输出都是确定性的：JSON 按键排序、固定缩进、以换行结尾；CSV 由 pandas 生成，不带索引。
"""
from pathlib import Path
from typing import Any, Dict, List, Optional
import json
import logging

import pandas as pd

from .games import AdvantageEstimate, GameConfig

logger = logging.getLogger(__name__)

GAME_COLUMNS = [
    'game', 'adversary', 'scheme', 'trials', 'seed', 'q_e', 'vrfy_mode',
    'acceptance', 'advantage', 'ci_low', 'ci_high', 'half_width', 'aborted',
]


def game_record(game: str, adversary: str, scheme: str, params: Dict[str, Any],
                cfg: GameConfig, result: AdvantageEstimate) -> Dict[str, Any]:
    """
    游戏结果 JSON 记录

    Args:
        game: 游戏名
        adversary: 对手名
        scheme: 被测方案（ikem / dem / demcd / phecd）
        params: 方案参数
        cfg: 实验配置
        result: 估计结果

    Returns:
        符合 game_result.schema.json 的字典
    """
    return {
        'game': game,
        'scheme': scheme,
        'params': params,
        'adversary': adversary,
        'trials': cfg.trials,
        'seed': cfg.seed,
        'q_e': cfg.q_e,
        'vrfy_mode': cfg.vrfy_mode,
        'acceptance': result.acceptance,
        'acceptance_ci': list(result.acceptance_ci) if result.acceptance_ci is not None else None,
        'advantage': result.advantage,
        'ci_low': result.ci_low,
        'ci_high': result.ci_high,
        'half_width': result.half_width,
        'ones': list(result.ones),
        'counts': list(result.counts),
        'accepted': list(result.accepted) if result.accepted is not None else None,
        'aborted': result.aborted,
    }


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def records_to_csv(records: List[Dict[str, Any]], columns: Optional[List[str]] = None) -> str:
    frame = pd.DataFrame(records, columns=columns)
    return frame.to_csv(index=False, lineterminator='\n')


def game_csv(record: Dict[str, Any]) -> str:
    """把单条游戏记录展平成一行 CSV（参数以 param_ 前缀展开）"""
    row = {column: record[column] for column in GAME_COLUMNS}
    columns = list(GAME_COLUMNS)
    for key in sorted(record['params']):
        row[f'param_{key}'] = record['params'][key]
        columns.append(f'param_{key}')
    return records_to_csv([row], columns)


def write_output(text: str, path: Optional[str]) -> Optional[Path]:
    """写到文件；path 为空时由调用方输出到 stdout"""
    if not path:
        return None
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding='utf-8')
    logger.info(f"结果已写入: {target}")
    return target
