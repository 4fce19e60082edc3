import logging

from django.db.models.signals import post_save
from django.dispatch import receiver

from experiments.models import ExperimentRun

logger = logging.getLogger(__name__)


@receiver(post_save, sender=ExperimentRun)
def log_finished_run(sender, instance, created, **kwargs):
    """Пишет в лог сводку о сохранённом запуске."""
    if created:
        logger.info(
            f"Run '{instance.command}' (seed={instance.seed}) finished in "
            f"{instance.duration_seconds:.1f}s: {instance.rows} rows → '{instance.result_path}'"
        )
