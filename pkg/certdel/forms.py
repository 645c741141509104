"""
运行配置 RunConfig 的校验

配置来源按优先级从低到高合并：settings 默认值 → 预设 → --config JSON 文件 → 命令行参数。
合并后的字典整体交给 RunConfigForm 校验；未知键在进入表单之前就被拒绝。
"""
from pathlib import Path
from typing import Any, Dict, Iterable, Optional
import json

from django import forms
from django.conf import settings
from django.core.exceptions import ValidationError

from .exceptions import ParameterError
from .utils import presets
from .utils.correlated import SourceSpec
from .utils.dem import OTP, STREAM
from .utils.demcd import DEFAULT_MODE, VRFY_MODES
from .utils.games import GAMES
from .utils.ikem import IkemParams
from .utils.oracle import MAX_LAMBDA

COMMANDS = ('demo', 'game', 'oracle')
OUTPUT_FORMATS = ('json', 'csv', 'text')

# JSON 中的 "lambda" 对应表单字段 lam
KEY_ALIASES = {'lambda': 'lam'}


def _choices(values: Iterable[str]):
    return [(value, value) for value in values]


class RunConfigForm(forms.Form):
    command = forms.ChoiceField(choices=_choices(COMMANDS))
    preset = forms.ChoiceField(choices=_choices(presets.PRESETS), required=False)

    # 方案参数
    n = forms.IntegerField(min_value=1, help_text='相关源长度')
    p_b = forms.FloatField(min_value=0.0, max_value=0.5, help_text='X→Y 翻转概率')
    p_e = forms.FloatField(min_value=0.0, max_value=0.5, help_text='X→Z 翻转概率')
    key_len = forms.IntegerField(min_value=0, help_text='iKEM 密钥长度 ℓ')
    check_len = forms.IntegerField(min_value=1, help_text='确认标签长度 c')
    block_len = forms.IntegerField(min_value=0, help_text='Hamming 分块长度，0 表示不协调')
    lam = forms.IntegerField(min_value=1, help_text='每个消息比特的量子比特数 λ')
    dem = forms.ChoiceField(choices=_choices((OTP, STREAM)))
    per_bit_capsule = forms.BooleanField(required=False)

    # 实验参数
    game = forms.ChoiceField(choices=_choices(GAMES), required=False)
    adversary = forms.CharField(required=False)
    trials = forms.IntegerField(min_value=1)
    q_e = forms.IntegerField(min_value=0)
    seed = forms.IntegerField(min_value=0)
    vrfy_mode = forms.ChoiceField(choices=_choices(VRFY_MODES))
    workers = forms.IntegerField(min_value=1)

    output = forms.CharField(required=False)
    format = forms.ChoiceField(choices=_choices(OUTPUT_FORMATS), required=False)

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data

        command = cleaned_data.get('command')
        if command == 'game':
            self._validate_game(cleaned_data)
        elif command == 'oracle':
            self._validate_oracle(cleaned_data)

        try:
            spec = SourceSpec(cleaned_data['n'], cleaned_data['p_b'], cleaned_data['p_e'])
            IkemParams(spec, key_len=cleaned_data['key_len'], check_len=cleaned_data['check_len'],
                       block_len=cleaned_data['block_len'])
        except ParameterError as e:
            raise ValidationError(f'方案参数不合法: {e}')
        return cleaned_data

    def _validate_game(self, cleaned_data):
        """验证 game 命令"""
        from .utils.games import builtin_adversaries

        game = cleaned_data.get('game')
        adversary = cleaned_data.get('adversary')
        if not game:
            raise ValidationError({'game': 'game 命令必须指定 --name'})
        if not adversary:
            raise ValidationError({'adversary': 'game 命令必须指定 --adversary'})
        catalog = builtin_adversaries()
        if adversary not in catalog:
            raise ValidationError({'adversary': f'未知对手 {adversary}，可用: {", ".join(sorted(catalog))}'})
        if not catalog[adversary].supports(game):
            raise ValidationError({'adversary': f'对手 {adversary} 不适用于游戏 {game}'})

    def _validate_oracle(self, cleaned_data):
        """验证 oracle 命令：只支持小 λ"""
        if cleaned_data['lam'] > MAX_LAMBDA:
            raise ValidationError({'lam': f'oracle 只支持 λ ≤ {MAX_LAMBDA}，得到 {cleaned_data["lam"]}'})


def normalize_keys(data: Dict[str, Any]) -> Dict[str, Any]:
    return {KEY_ALIASES.get(key, key): value for key, value in data.items()}


def reject_unknown(data: Dict[str, Any]) -> None:
    unknown = sorted(set(data) - set(RunConfigForm.base_fields))
    if unknown:
        raise ValidationError(f'未知配置项: {", ".join(unknown)}')


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """读取 JSON 配置文件；键名可以用 lambda 代替 lam"""
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f'无法读取配置文件 {path}: {e}')
    if not isinstance(data, dict):
        raise ValidationError(f'配置文件 {path} 顶层必须是对象')
    data = normalize_keys(data)
    reject_unknown(data)
    return data


def base_values(command: str, default_preset: str) -> Dict[str, Any]:
    return {
        'command': command,
        'trials': settings.CERTDEL_TRIALS,
        'q_e': 0,
        'seed': settings.CERTDEL_SEED,
        'vrfy_mode': DEFAULT_MODE,
        'workers': settings.CERTDEL_WORKERS,
        'preset': default_preset,
    }


def build_run_config(command: str, overrides: Dict[str, Any], config_path: Optional[str] = None,
                     default_preset: str = presets.DEFAULT_PRESET) -> Dict[str, Any]:
    """
    合并并校验一次运行的配置

    Args:
        command: demo / game / oracle
        overrides: 命令行参数（值为 None 的项视为未给出）
        config_path: 可选 JSON 配置文件
        default_preset: 未指定预设时使用的预设

    Returns:
        校验后的 cleaned_data

    Raises:
        ValidationError: 未知键或任意字段不合法
    """
    overrides = normalize_keys({key: value for key, value in overrides.items() if value is not None})
    reject_unknown(overrides)
    from_file = load_config_file(config_path)

    preset_name = overrides.get('preset') or from_file.get('preset') or default_preset
    if preset_name not in presets.PRESETS:
        raise ValidationError(f'未知预设: {preset_name}，可用: {", ".join(presets.PRESETS)}')

    data = base_values(command, default_preset)
    data.update(presets.preset_values(preset_name))
    data.update(from_file)
    data.update(overrides)
    data['preset'] = preset_name
    data['command'] = command

    form = RunConfigForm(data)
    if not form.is_valid():
        raise ValidationError(format_errors(form))
    return form.cleaned_data


def format_errors(form: forms.Form) -> str:
    parts = []
    for field, errors in form.errors.items():
        prefix = '' if field == '__all__' else f'{field}: '
        parts.append(prefix + '; '.join(errors))
    return ' | '.join(parts)
