import uuid
from pathlib import Path

from django.db import models


class ExperimentCommand(models.TextChoices):
    """Перечисление команд, результаты которых сопровождаются манифестом."""

    BER = 'ber', 'BER/FER'
    EXIT = 'exit', 'EXIT-диаграмма'
    EVOLVE = 'evolve', 'Эволюция SNR'
    COV = 'cov', 'Ковариация'
    INTERLEAVER = 'interleaver', 'Перемежитель'


class ExperimentRunManager(models.Manager['ExperimentRun']):
    """Менеджер для модели ExperimentRun."""

    def for_result(self, result_path: Path | str) -> 'ExperimentRun | None':
        """
        Возвращает последний запуск, записавший указанный файл результата.

        :param result_path: Путь к CSV или файлу перестановки.
        :return: Запись о запуске или None, если файл не создавался этим проектом.
        """
        runs = self.filter(result_path=str(Path(result_path).resolve()))
        return runs.order_by('-finished_at').first()


class ExperimentRun(models.Model):
    """
    Манифест запуска эксперимента.

    Хранит полностью разрешённую конфигурацию (все значения по умолчанию
    подставлены), зерно, версию инструмента и временные метки. Повторный запуск
    по этой конфигурации воспроизводит тело CSV байт в байт.
    """

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    command = models.CharField(max_length=20, choices=ExperimentCommand.choices)
    config = models.JSONField()
    seed = models.BigIntegerField()
    version = models.CharField(max_length=20)
    result_path = models.CharField(max_length=500)
    manifest_path = models.CharField(max_length=500)
    rows = models.PositiveIntegerField(default=0)
    timings = models.JSONField(default=dict, blank=True)
    started_at = models.DateTimeField()
    finished_at = models.DateTimeField()
    created_at = models.DateTimeField(auto_now_add=True)

    objects = ExperimentRunManager()

    class Meta:
        ordering = ['-finished_at']
        indexes = [models.Index(fields=['command', 'finished_at'], name='experiments_command_idx')]

    def __str__(self) -> str:
        return f"{self.command} seed={self.seed} → {self.result_path}"

    @property
    def duration_seconds(self) -> float:
        return (self.finished_at - self.started_at).total_seconds()
