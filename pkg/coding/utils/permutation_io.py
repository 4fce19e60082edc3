"""Текстовый формат перестановки: первая строка "N", затем N строк "i map[i]"."""
import logging
from pathlib import Path

import numpy as np

from coding.exceptions import PermutationFileError
from coding.services.interleave import Permutation

logger = logging.getLogger(__name__)


def format_permutation(perm: Permutation) -> str:
    """
    Сериализует перестановку в текстовый формат.

    :param perm: Перестановка длины N.
    :return: Текст с завершающим переводом строки.
    """
    lines = [str(perm.size)]
    lines.extend(f"{index} {target}" for index, target in enumerate(perm.mapping.tolist()))
    return '\n'.join(lines) + '\n'


def write_permutation(perm: Permutation, path: Path) -> None:
    """Записывает перестановку в файл, создавая родительский каталог при необходимости."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_permutation(perm), encoding='utf-8')
    logger.info(f"Permutation of length {perm.size} written to '{path}'")


def parse_permutation(text: str) -> Permutation:
    """
    Разбирает текстовый формат с построчной диагностикой.

    :param text: Содержимое файла.
    :return: Перестановка.
    :raises PermutationFileError: С номером строки (начиная с 1), на которой найдена ошибка:
                                  нечисловое поле, индекс вне диапазона, пропуск или
                                  повтор индекса, повтор назначения, неверное число строк.
    """
    lines = [line.strip() for line in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines:
        raise PermutationFileError("Файл перестановки пуст.", 1)

    try:
        size = int(lines[0])
    except ValueError as e:
        raise PermutationFileError(f"В первой строке ожидалось N, получено '{lines[0]}'.", 1) from e
    if size < 1:
        raise PermutationFileError(f"Длина перестановки должна быть положительной, получено {size}.", 1)
    if len(lines) - 1 != size:
        raise PermutationFileError(
            f"Ожидалось {size} строк отображения, найдено {len(lines) - 1}.",
            len(lines) + 1 if len(lines) - 1 < size else size + 2,
        )

    mapping = np.full(size, -1, dtype=np.int64)
    seen_targets: dict[int, int] = {}
    for line_number, line in enumerate(lines[1:], start=2):
        fields = line.split()
        if len(fields) != 2:
            raise PermutationFileError(f"Ожидалось 'i map[i]', получено '{line}'.", line_number)
        try:
            index, target = int(fields[0]), int(fields[1])
        except ValueError as e:
            raise PermutationFileError(f"Нечисловое поле в строке '{line}'.", line_number) from e
        if not 0 <= index < size or not 0 <= target < size:
            raise PermutationFileError(f"Индекс вне [0, {size}) в строке '{line}'.", line_number)
        if mapping[index] != -1:
            raise PermutationFileError(f"Повторный индекс {index}.", line_number)
        if target in seen_targets:
            raise PermutationFileError(
                f"Повторное назначение {target} (уже в строке {seen_targets[target]}).", line_number
            )
        mapping[index] = target
        seen_targets[target] = line_number

    return Permutation.from_mapping(mapping)


def decode_permutation(data: bytes) -> str:
    """
    Декодирует содержимое файла как UTF-8 построчно.

    :raises PermutationFileError: С номером первой строки, которая не является корректным UTF-8.
    """
    lines = []
    for line_number, raw_line in enumerate(data.splitlines(keepends=True), start=1):
        try:
            lines.append(raw_line.decode('utf-8'))
        except UnicodeDecodeError as e:
            raise PermutationFileError("Строка не является корректным UTF-8.", line_number) from e
    return ''.join(lines)


def read_permutation(path: Path) -> Permutation:
    """
    Читает перестановку из файла (внешняя внутриблочная таблица, например 3GPP).

    :raises PermutationFileError: Если файл отсутствует или некорректен.
    """
    try:
        data = path.read_bytes()
    except OSError as e:
        logger.error(f"Cannot read permutation file '{path}': {e}", exc_info=True)
        raise PermutationFileError(f"Не удалось прочитать файл '{path}'.") from e
    perm = parse_permutation(decode_permutation(data))
    logger.info(f"Permutation of length {perm.size} loaded from '{path}'")
    return perm
