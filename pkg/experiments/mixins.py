import logging
from collections.abc import Callable
from functools import wraps
from typing import Any

from django.core.management.base import CommandError

from coding.exceptions import (
    CodingError,
    ConfigurationError,
    ConstructionError,
    PermutationFileError,
    UnrepairableBoundaryError,
)
from experiments.exceptions import ManifestError, ResultWriteError

logger = logging.getLogger(__name__)

# Код выхода при ошибке конфигурации или входных файлов
USAGE_ERROR = 2


def flag_name(field: str) -> str:
    """Имя поля формы или параметра -> флаг командной строки."""
    return '--' + field.replace('_', '-')


class ErrorFormattingMixin:
    """Миксин для форм экспериментов."""

    def handle_form_validation_error(self) -> str:
        """
        Формирует строку ошибок из невалидной формы.

        Ошибки полей выводятся с именем флага, ошибки формы целиком - без префикса.

        :return: Строка, содержащая все сообщения об ошибках.
        """
        if not self.errors:
            return ""
        error_messages: list[str] = []
        for field, errors in self.errors.items():
            error_string = '; '.join(map(str, errors))
            if field == '__all__':
                error_messages.append(error_string)
            else:
                error_messages.append(f"{flag_name(field)}: {error_string}")

        return "\n".join(error_messages)


def handle_command_errors(handle: Callable[..., Any]) -> Callable[..., Any]:
    """Декоратор для обработки исключений, возникающих в ``handle`` команд экспериментов.

    Доменные ошибки превращаются в ``CommandError`` с кодом выхода 2 и однострочной
    диагностикой, называющей флаг (или строку файла). Непредвиденные ошибки
    пишутся в лог и завершают команду с кодом 1.

    :param handle: Оборачиваемый метод ``handle``.
    :return: Обёрнутый метод с обработкой исключений.
    """

    @wraps(handle)
    def _wrapped_handle(self, *args, **options):
        try:
            return handle(self, *args, **options)
        except CommandError:
            raise
        except ConfigurationError as e:
            message = f"{flag_name(e.field)}: {e}" if e.field else str(e)
            raise CommandError(message, returncode=USAGE_ERROR) from e
        except PermutationFileError as e:
            message = f"строка {e.line_number}: {e}" if e.line_number is not None else str(e)
            raise CommandError(message, returncode=USAGE_ERROR) from e
        except ConstructionError as e:
            raise CommandError(f"{flag_name('spread')}: {e}", returncode=USAGE_ERROR) from e
        except UnrepairableBoundaryError as e:
            raise CommandError(f"{flag_name('boundary')}: {e}", returncode=USAGE_ERROR) from e
        except ManifestError as e:
            raise CommandError(f"{flag_name('manifest')}: {e}", returncode=USAGE_ERROR) from e
        except ResultWriteError as e:
            raise CommandError(f"{flag_name('output')}: {e}", returncode=USAGE_ERROR) from e
        except CodingError as e:
            raise CommandError(str(e), returncode=USAGE_ERROR) from e
        except Exception as e:
            logger.critical(f"Unexpected error: {e}", exc_info=True)
            raise CommandError(f"Непредвиденная ошибка: {e}", returncode=1) from e

    return _wrapped_handle
