import json
import logging
from pathlib import Path
from typing import Any

from django.core.serializers.json import DjangoJSONEncoder
from django.db import transaction
from django.utils import timezone

from experiments.exceptions import ManifestError, ResultWriteError
from experiments.models import ExperimentRun
from ibptc_lab import __version__

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = '.manifest.json'
REQUIRED_KEYS = ('command', 'config', 'seed')


class ManifestService:
    """
    Сопровождает каждый файл результата манифестом запуска.

    Манифест содержит полностью разрешённую конфигурацию, зерно, версию
    инструмента и временные метки. Он записывается рядом с результатом
    (``<result>.manifest.json``) и дублируется строкой ``ExperimentRun`` в базе.
    """

    def __init__(self, command: str, config: dict[str, Any], seed: int):
        """
        Инициализирует сервис и фиксирует время начала запуска.

        :param command: Имя подкоманды.
        :param config: Разрешённая конфигурация (значения по умолчанию подставлены).
        :param seed: Мастер-зерно.
        """
        self.command = command
        self.config = config
        self.seed = seed
        self.started_at = timezone.now()

    @staticmethod
    def manifest_path_for(result_path: Path) -> Path:
        return result_path.with_name(result_path.name + MANIFEST_SUFFIX)

    def record(
            self, result_path: Path, rows: int, timings: dict[str, Any] | None = None
    ) -> ExperimentRun:
        """
        Атомарно сохраняет запись о запуске и пишет файл манифеста.

        Если файл манифеста записать не удалось, транзакция откатывается.

        :param result_path: Путь к файлу результата.
        :param rows: Число строк данных в результате.
        :param timings: Замеры времени (в CSV не попадают).
        :raises ResultWriteError: Если манифест не удалось записать.
        """
        result_path = Path(result_path).resolve()
        manifest_path = self.manifest_path_for(result_path)

        with transaction.atomic():
            run = ExperimentRun.objects.create(
                command=self.command,
                config=self.config,
                seed=self.seed,
                version=__version__,
                result_path=str(result_path),
                manifest_path=str(manifest_path),
                rows=rows,
                timings=timings or {},
                started_at=self.started_at,
                finished_at=timezone.now(),
            )
            self._write(manifest_path, run)

        logger.info(f"Manifest written: '{manifest_path}'")
        return run

    @staticmethod
    def _write(path: Path, run: ExperimentRun) -> None:
        payload = {
            'id': run.id,
            'command': run.command,
            'version': run.version,
            'seed': run.seed,
            'config': run.config,
            'result_path': run.result_path,
            'rows': run.rows,
            'timings': run.timings,
            'started_at': run.started_at,
            'finished_at': run.finished_at,
        }
        try:
            path.write_text(
                json.dumps(payload, cls=DjangoJSONEncoder, indent=2, ensure_ascii=False) + '\n',
                encoding='utf-8',
            )
        except OSError as e:
            logger.error(f"Cannot write manifest '{path}': {e}", exc_info=True)
            raise ResultWriteError(f"Не удалось записать манифест '{path}'.") from e

    @staticmethod
    def load(path: Path) -> dict[str, Any]:
        """
        Читает манифест для повторного запуска.

        :param path: Путь к файлу манифеста.
        :return: Содержимое манифеста.
        :raises ManifestError: Если файл отсутствует, не JSON или без обязательных ключей.
        """
        try:
            payload = json.loads(Path(path).read_text(encoding='utf-8'))
        except OSError as e:
            raise ManifestError(f"Не удалось прочитать манифест '{path}'.", str(path)) from e
        except json.JSONDecodeError as e:
            raise ManifestError(f"Манифест '{path}' - некорректный JSON: {e.msg}.", str(path)) from e

        if not isinstance(payload, dict):
            raise ManifestError(f"Манифест '{path}' должен содержать JSON-объект.", str(path))
        missing = [key for key in REQUIRED_KEYS if key not in payload]
        if missing:
            raise ManifestError(f"В манифесте '{path}' нет ключей: {', '.join(missing)}.", str(path))
        if not isinstance(payload['config'], dict):
            raise ManifestError(f"Поле config манифеста '{path}' должно быть объектом.", str(path))
        return payload
