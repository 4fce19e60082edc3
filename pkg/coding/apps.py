from django.apps import AppConfig


class CodingConfig(AppConfig):
    """
    Конфигурация приложения `coding`.

    Приложение содержит только вычислительный слой: RSC-кодер, перемежители,
    SISO-декодер, турбо-кодек и модель канала. Моделей и миграций у него нет.
    """

    default_auto_field = 'django.db.models.BigAutoField'
    name = 'coding'
