from django.core.management.base import CommandError

from ...exceptions import ParameterError
from ...utils import games
from ...utils.games import GameConfig, GameRunner, builtin_adversaries
from ...utils.presets import build_components
from ...utils.reporting import dump_json, game_csv, game_record
from ..base import SCHEME_OPTIONS, USAGE_ERROR, ConfigCommand

# 游戏 -> (被测方案名, 组件属性, GameRunner 方法名)
GAME_TARGETS = {
    games.IKIND: ('ikem', 'ikem', 'run_ikind'),
    games.IND_OT_DEM: ('dem', 'dem', 'run_ind_ot_dem'),
    games.IND_QE_CPA: ('phecd', 'phecd', 'run_ind_qe_cpa'),
    games.EV_CD_DEMCD: ('demcd', 'demcd', 'run_ev_cd_demcd'),
    games.EV_QE_CD: ('phecd', 'phecd', 'run_ev_qe_cd'),
}


class Command(ConfigCommand):
    help = '运行安全实验（IKIND / IND-OT / IND-q_e-CPA / EV-CD / EV-q_e-CD），输出 JSON 或 CSV 记录'

    command_name = 'game'

    def add_arguments(self, parser):
        parser.add_argument('--name', dest='game', type=str, help=f'游戏名: {", ".join(games.GAMES)}')
        parser.add_argument('--adversary', type=str, help='对手名，见 --list')
        parser.add_argument('--trials', type=int, help='每个分支 (b = 0 / b = 1) 的实验次数')
        parser.add_argument('--q-e', dest='q_e', type=int, help='加密/封装预言机查询预算 q_e')
        parser.add_argument('--workers', type=int, help='并行线程数，不影响结果')
        parser.add_argument('--per-bit-capsule', dest='per_bit_capsule', action='store_true', default=None,
                            help='每个消息比特单独封装一次 iKEM 密钥')
        parser.add_argument('--output', type=str, help='输出文件，默认 stdout')
        parser.add_argument('--format', type=str, default='json', help='输出格式 json / csv')
        parser.add_argument(
            '--list',
            action='store_true',
            help='列出所有内置对手及其适用的游戏'
        )
        self.add_scheme_arguments(parser)

    def handle(self, *args, **options):
        if options.get('list'):
            self.list_adversaries()
            return
        if options['format'] not in ('json', 'csv'):
            raise CommandError(f"game 不支持格式 {options['format']}", returncode=USAGE_ERROR)

        config = self.load_run_config(
            options,
            SCHEME_OPTIONS + ('game', 'adversary', 'trials', 'q_e', 'seed', 'vrfy_mode', 'workers',
                              'per_bit_capsule'),
        )
        game = config['game']
        adversary = builtin_adversaries()[config['adversary']]
        components = build_components(config)
        try:
            cfg = GameConfig(trials=config['trials'], q_e=config['q_e'], seed=config['seed'],
                             vrfy_mode=config['vrfy_mode'], workers=config['workers'])
            scheme_name, attribute, method = GAME_TARGETS[game]
            runner = GameRunner(cfg)
            result = getattr(runner, method)(getattr(components, attribute), adversary)
        except ParameterError as e:
            raise CommandError(f'参数不适用于该实验: {e}', returncode=USAGE_ERROR)

        record = game_record(game, adversary.name, scheme_name, components.params(), cfg, result)
        text = game_csv(record) if options['format'] == 'csv' else dump_json(record)
        self.emit(text, options.get('output'))

    def list_adversaries(self):
        """列出所有内置对手"""
        self.stdout.write(self.style.SUCCESS('📋 内置对手:'))
        for name, adversary in sorted(builtin_adversaries().items()):
            descriptor = adversary.descriptor()
            extra = f'  [oracle: {descriptor.name}]' if descriptor is not None else ''
            self.stdout.write(f'  • {name}: {", ".join(adversary.games)}{extra}')
