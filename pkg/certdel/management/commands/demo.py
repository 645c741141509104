from django.core.management.base import CommandError

from ...exceptions import KeyLengthError, LengthMismatchError, RegisterConsumedError
from ...utils import bits as bitops
from ...utils.demo import DemoRunner, PATHS, render_text
from ...utils.presets import build_components
from ...utils.reporting import dump_json
from ..base import CONTRACT_VIOLATION, SCHEME_OPTIONS, USAGE_ERROR, ConfigCommand


class Command(ConfigCommand):
    help = 'pHE-CD 端到端演示：keygen → enc → {dec | del → vrfy}'

    command_name = 'demo'
    default_preset = 'noiseless'

    def add_arguments(self, parser):
        parser.add_argument(
            '--path',
            type=str,
            default='decrypt',
            help='decrypt / delete / both（both 会违反删除与解密互斥，预期失败）'
        )
        parser.add_argument(
            '--message',
            type=str,
            default='1',
            help='要加密的比特串，例如 1011'
        )
        parser.add_argument(
            '--format',
            type=str,
            default='json',
            help='输出格式 json / text'
        )
        parser.add_argument('--per-bit-capsule', dest='per_bit_capsule', action='store_true', default=None,
                            help='每个消息比特单独封装一次 iKEM 密钥')
        parser.add_argument('--output', type=str, help='输出文件，默认 stdout')
        self.add_scheme_arguments(parser)

    def handle(self, *args, **options):
        if options['path'] not in PATHS:
            raise CommandError(f"未知路径 {options['path']}，可用: {', '.join(PATHS)}", returncode=USAGE_ERROR)
        if options['format'] not in ('json', 'text'):
            raise CommandError(f"demo 不支持格式 {options['format']}", returncode=USAGE_ERROR)
        try:
            message = bitops.from_str(options['message'])
        except ValueError as e:
            raise CommandError(str(e), returncode=USAGE_ERROR)
        if len(message) < 1:
            raise CommandError('消息至少需要 1 个比特', returncode=USAGE_ERROR)

        config = self.load_run_config(options, SCHEME_OPTIONS + ('seed', 'vrfy_mode', 'per_bit_capsule'))
        components = build_components(config)
        runner = DemoRunner(components, config['seed'], config['vrfy_mode'])
        try:
            transcript = runner.run(message, options['path'])
        except KeyLengthError as e:
            raise CommandError(f'密钥长度不足: {e}', returncode=USAGE_ERROR)
        except RegisterConsumedError as e:
            raise CommandError(f'违反删除/解密互斥约定（量子寄存器已被消耗）: {e}', returncode=CONTRACT_VIOLATION)
        except LengthMismatchError as e:
            raise CommandError(f'长度约定被违反: {e}', returncode=CONTRACT_VIOLATION)

        if options['format'] == 'text':
            text = '\n'.join(render_text(transcript)) + '\n'
        else:
            text = dump_json(transcript)
        self.emit(text, options.get('output'))
