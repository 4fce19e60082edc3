class ManifestError(Exception):
    """Возникает при чтении отсутствующего или повреждённого манифеста запуска."""

    def __init__(self, message: str, path: str | None = None):
        """
        Инициализация исключения.

        :param message: Сообщение об ошибке.
        :param path: Путь к файлу манифеста.
        """
        super().__init__(message)
        self.path = path


class ResultWriteError(Exception):
    """Возникает, если файл результата или манифест не удалось записать."""

    pass
