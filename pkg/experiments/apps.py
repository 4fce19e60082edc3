from django.apps import AppConfig


class ExperimentsConfig(AppConfig):
    """
    Конфигурация приложения `experiments`.

    Приложение отвечает за запуск экспериментов (BER, EXIT, эволюция SNR,
    ковариация), хранение манифестов запусков и команды manage.py.
    """

    default_auto_field = 'django.db.models.BigAutoField'
    name = 'experiments'

    def ready(self) -> None:
        """Подключает обработчики сигналов после загрузки реестра приложений."""
        import experiments.signals  # noqa: F401
