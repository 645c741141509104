from typing import Any, Dict, Optional

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from ..forms import build_run_config
from ..utils.reporting import write_output

CONTRACT_VIOLATION = 1
USAGE_ERROR = 2

SCHEME_OPTIONS = ('preset', 'n', 'p_b', 'p_e', 'key_len', 'check_len', 'block_len', 'lam', 'dem')


class ConfigCommand(BaseCommand):
    """带 RunConfig 校验的命令基类；日志走 stderr，结果走 stdout 或 --output"""

    command_name = ''
    default_preset: Optional[str] = None

    def add_scheme_arguments(self, parser):
        parser.add_argument('--preset', type=str, help='参数预设 (tiny / noiseless / reference / oracle)')
        parser.add_argument('--config', type=str, help='JSON 配置文件，命令行参数优先')
        parser.add_argument('--n', type=int, help='相关源长度 n')
        parser.add_argument('--p-b', dest='p_b', type=float, help='Bob 的翻转概率 p_B')
        parser.add_argument('--p-e', dest='p_e', type=float, help='Eve 的翻转概率 p_E')
        parser.add_argument('--key-len', dest='key_len', type=int, help='iKEM 密钥长度 ℓ')
        parser.add_argument('--check-len', dest='check_len', type=int, help='确认标签长度 c')
        parser.add_argument('--block-len', dest='block_len', type=int, help='Hamming 分块长度，0 表示不协调')
        parser.add_argument('--lambda', dest='lam', type=int, help='每个消息比特的量子比特数 λ')
        parser.add_argument('--dem', type=str, help='DEM 变体 (otp / stream)')
        parser.add_argument('--seed', type=int, help='随机种子，默认取 CERTDEL_SEED')
        parser.add_argument('--vrfy-mode', dest='vrfy_mode', type=str, help='验证模式 (default / strict)')

    def load_run_config(self, options: Dict[str, Any], keys) -> Dict[str, Any]:
        overrides = {key: options.get(key) for key in keys}
        try:
            kwargs = {'default_preset': self.default_preset} if self.default_preset else {}
            return build_run_config(self.command_name, overrides, options.get('config'), **kwargs)
        except ValidationError as e:
            raise CommandError(f"配置无效: {'; '.join(e.messages)}", returncode=USAGE_ERROR)

    def emit(self, text: str, output: Optional[str]) -> None:
        if write_output(text, output) is None:
            self.stdout.write(text, ending='')
        else:
            self.stderr.write(self.style.SUCCESS(f'✅ 结果已写入 {output}'))
