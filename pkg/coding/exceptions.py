class CodingError(Exception):
    """Базовое исключение вычислительного слоя."""

    pass


class ConfigurationError(CodingError):
    """Исключение, возникающее при недопустимых параметрах кода, перемежителя или канала."""

    def __init__(self, message: str, field: str | None = None):
        """
        Инициализация исключения.

        :param message: Сообщение об ошибке (для логов и диагностики CLI).
        :param field: Имя параметра (флага CLI), вызвавшего ошибку.
        """
        super().__init__(message)
        self.field = field


class PermutationError(CodingError):
    """Возникает, если перестановка не биективна или нарушает ограничение на размах."""

    pass


class ConstructionError(PermutationError):
    """Возникает, когда s-random перемежитель не удалось построить за отведённое число перезапусков."""

    def __init__(self, message: str, restarts: int):
        """
        Инициализация исключения.

        :param message: Сообщение об ошибке.
        :param restarts: Число выполненных перезапусков.
        """
        super().__init__(message)
        self.restarts = restarts


class UnrepairableBoundaryError(PermutationError):
    """Возникает, если коллизии режима clamp на краях потока нельзя устранить попарными обменами."""

    pass


class PermutationFileError(PermutationError):
    """Возникает при разборе некорректного файла перестановки."""

    def __init__(self, message: str, line_number: int | None = None):
        """
        Инициализация исключения.

        :param message: Сообщение об ошибке.
        :param line_number: Номер строки файла (начиная с 1), на которой обнаружена ошибка.
        """
        super().__init__(message)
        self.line_number = line_number


class LaneLengthError(CodingError):
    """Возникает при несогласованных длинах LLR-дорожек или при NaN на входе декодера."""

    pass


class ConvergenceError(CodingError):
    """Возникает, когда обращение J-функции не сошлось с заданной точностью."""

    pass
