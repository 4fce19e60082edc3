import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

from experiments.exceptions import ResultWriteError

logger = logging.getLogger(__name__)

BER_COLUMNS = (
    'ebn0_db', 'bits', 'bit_errors', 'ber', 'frames', 'frame_errors', 'fer', 'mean_iters', 'seconds',
    'under_sampled',
)
EXIT_COLUMNS = ('ia', 'ie', 'snr_db', 'constituent')
TRACE_COLUMNS = ('iteration', 'value', 'constituent')


def format_value(value) -> str:
    """Числа форматируются с фиксированной точностью, чтобы тело CSV было воспроизводимо."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}" if value != 0.0 else '0'
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """
    Записывает CSV: заголовок, затем строки; разделитель - запятая, без кавычек.

    :param path: Путь к файлу; родительский каталог создаётся при необходимости.
    :param header: Имена столбцов.
    :param rows: Строки значений.
    :return: Число записанных строк данных.
    :raises ResultWriteError: Если файл не удалось записать.
    """
    count = 0
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n', quoting=csv.QUOTE_MINIMAL)
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(value) for value in row])
                count += 1
    except OSError as e:
        logger.error(f"Cannot write CSV '{path}': {e}", exc_info=True)
        raise ResultWriteError(f"Не удалось записать файл '{path}'.") from e
    logger.info(f"CSV written: '{path}', {count} rows")
    return count
