import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from django import forms
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError, CommandParser

from experiments.forms import InterleaverFieldsForm
from experiments.mixins import USAGE_ERROR, flag_name, handle_command_errors
from experiments.services.manifest_service import ManifestService

logger = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    """Итог работы подкоманды: число строк результата и замеры времени для манифеста."""

    rows: int
    timings: dict[str, Any] = field(default_factory=dict)


class ExperimentBaseCommand(BaseCommand):
    """
    Базовая команда эксперимента.

    Флаги строятся по полям формы (``block_len`` -> ``--block-len``), значения
    проверяет форма. ``--manifest`` повторяет запуск по сохранённой конфигурации,
    ``--output`` задаёт файл результата. Каждый записанный результат сопровождается
    манифестом.
    """

    command_name: str
    form_class: type[InterleaverFieldsForm]
    output_suffix = '.csv'

    def add_arguments(self, parser: CommandParser) -> None:
        for name, form_field in self.form_class.base_fields.items():
            if isinstance(form_field, forms.BooleanField):
                parser.add_argument(flag_name(name), dest=name, action='store_true')
            else:
                parser.add_argument(flag_name(name), dest=name, default=None)
        parser.add_argument('--output', type=Path, default=None, help="Файл результата.")
        parser.add_argument(
            '--manifest', type=Path, default=None, help="Повторить запуск по манифесту."
        )

    @handle_command_errors
    def handle(self, *args, **options) -> None:
        data, recorded_output = self.resolve_input(options)
        form = self.form_class(data=data)
        if not form.is_valid():
            message = '; '.join(form.handle_form_validation_error().splitlines())
            raise CommandError(message, returncode=USAGE_ERROR)

        config = form.resolved_config()
        output = options['output'] or recorded_output or self.default_output(config)
        manifest_service = ManifestService(self.command_name, config, config['seed'])

        outcome = self.run(form, Path(output))
        if outcome is None:
            return
        run = manifest_service.record(Path(output), outcome.rows, outcome.timings)
        self.stdout.write(self.style.SUCCESS(f"{outcome.rows} строк записано в '{run.result_path}'"))

    def resolve_input(self, options: dict[str, Any]) -> tuple[dict[str, Any], Path | None]:
        """Данные формы: из флагов или, при ``--manifest``, из сохранённой конфигурации."""
        if options['manifest'] is None:
            return {name: options.get(name) for name in self.form_class.base_fields}, None

        payload = ManifestService.load(options['manifest'])
        if payload['command'] != self.command_name:
            raise CommandError(
                f"--manifest: манифест команды '{payload['command']}', "
                f"а запущена '{self.command_name}'.",
                returncode=USAGE_ERROR,
            )
        logger.info(f"Replaying manifest '{options['manifest']}'")
        recorded = payload.get('result_path')
        return payload['config'], Path(recorded) if recorded else None

    def default_output(self, config: dict[str, Any]) -> Path:
        name = f"{self.command_name}-seed{config['seed']}{self.output_suffix}"
        return Path(settings.IBPTC_RESULTS_DIR) / name

    def run(self, form: Any, output: Path) -> RunOutcome | None:
        """Выполняет эксперимент и пишет результат; None означает, что файл результата не создавался."""
        raise NotImplementedError
