from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from ...exceptions import ParameterError
from ...utils import oracle
from ...utils.presets import build_components
from ...utils.reporting import dump_json, records_to_csv
from ..base import CONTRACT_VIOLATION, SCHEME_OPTIONS, USAGE_ERROR, ConfigCommand

ROW_COLUMNS = ['strategy', 'lambda', 'acceptance', 'distance']


class Command(ConfigCommand):
    help = 'λ ≤ 3 的精确枚举：证书接受率与验证后迹距离的权衡表，以及黄金文件维护'

    command_name = 'oracle'
    default_preset = 'oracle'

    def add_arguments(self, parser):
        parser.add_argument('--mode', dest='vrfy_mode', type=str, help='验证模式 (default / strict)')
        parser.add_argument('--format', type=str, default='json', help='输出格式 json / csv / text')
        parser.add_argument('--output', type=str, help='输出文件，默认 stdout')
        parser.add_argument(
            '--regen-golden',
            action='store_true',
            help='重新生成黄金文件'
        )
        parser.add_argument(
            '--check-golden',
            action='store_true',
            help='与已提交的黄金文件比较，不一致时以退出码 1 结束'
        )
        parser.add_argument('--golden-dir', type=str, help='黄金文件目录，默认取 CERTDEL_GOLDEN_DIR')
        parser.add_argument(
            '--ikem-sd',
            action='store_true',
            help='穷举计算当前 iKEM 参数下的精确密钥统计距离（需要 n ≤ 12）'
        )
        self.add_scheme_arguments(parser)

    def handle(self, *args, **options):
        if options['format'] not in ('json', 'csv', 'text'):
            raise CommandError(f"oracle 不支持格式 {options['format']}", returncode=USAGE_ERROR)
        config = self.load_run_config(options, SCHEME_OPTIONS + ('vrfy_mode',))
        lam, mode = config['lam'], config['vrfy_mode']

        if options.get('ikem_sd'):
            self.ikem_distance(config, options)
            return

        golden_dir = Path(options.get('golden_dir') or settings.CERTDEL_GOLDEN_DIR)
        if options.get('regen_golden'):
            path = oracle.write_golden(golden_dir, lam, mode)
            self.stderr.write(self.style.SUCCESS(f'✅ 黄金文件已更新: {path}'))
            return
        if options.get('check_golden'):
            differences = oracle.check_golden(golden_dir, lam, mode)
            if differences:
                for line in differences:
                    self.stderr.write(self.style.ERROR(f'  ❌ {line}'))
                raise CommandError(f'λ = {lam} ({mode}) 的黄金文件不一致', returncode=CONTRACT_VIOLATION)
            self.stderr.write(self.style.SUCCESS(f'✅ λ = {lam} ({mode}) 黄金文件一致'))
            return

        table = oracle.tradeoff_table(lam, mode=mode)
        records = oracle.table_records(table)
        if options['format'] == 'csv':
            text = records_to_csv(records, ROW_COLUMNS)
        elif options['format'] == 'text':
            text = table.to_string(index=False) + '\n'
        else:
            text = dump_json(records)
        self.emit(text, options.get('output'))

    def ikem_distance(self, config, options):
        """输出精确的 SD((Z, C*, K*), (Z, C*, U))"""
        components = build_components(config)
        params = components.ikem.params
        try:
            distance = oracle.exact_ikem_sd(params)
        except ParameterError as e:
            raise CommandError(str(e), returncode=USAGE_ERROR)
        record = {
            'params': params.to_dict(),
            'exact_key_distance': round(distance, oracle.GOLDEN_DECIMALS),
            'leftover_hash_budget': params.leftover_hash_budget(),
        }
        self.emit(dump_json(record), options.get('output'))
