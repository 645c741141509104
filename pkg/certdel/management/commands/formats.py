from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from ..base import USAGE_ERROR

SCHEMAS = ('game_result', 'oracle_row', 'demo_transcript')


class Command(BaseCommand):
    help = '打印字节布局文档 FORMATS.md 或某个 JSON Schema'

    def add_arguments(self, parser):
        parser.add_argument(
            '--schema',
            type=str,
            help=f'打印指定的 JSON Schema: {", ".join(SCHEMAS)}'
        )
        parser.add_argument(
            '--list',
            action='store_true',
            help='列出随文档发布的全部 Schema'
        )

    def handle(self, *args, **options):
        doc_dir = settings.CERTDEL_DOC_DIR
        if options.get('list'):
            self.stdout.write(self.style.SUCCESS('📋 JSON Schema:'))
            for name in SCHEMAS:
                self.stdout.write(f'  • {name}: {doc_dir / "schemas" / f"{name}.schema.json"}')
            return

        if options.get('schema'):
            name = options['schema']
            if name not in SCHEMAS:
                raise CommandError(f'未知 Schema {name}，可用: {", ".join(SCHEMAS)}', returncode=USAGE_ERROR)
            path = doc_dir / 'schemas' / f'{name}.schema.json'
        else:
            path = doc_dir / 'FORMATS.md'
        self.stdout.write(path.read_text(encoding='utf-8'), ending='')
