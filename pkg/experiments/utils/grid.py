from decimal import Decimal, InvalidOperation


def parse_grid(text: str) -> list[float]:
    """
    Разбирает сетку вида ``start:step:stop`` (или одно число).

    Оба конца включаются, если stop лежит на сетке. Вычисления ведутся в Decimal,
    поэтому ``0.0:0.1:0.9`` даёт ровно десять точек.

    :param text: Строка сетки.
    :return: Список значений по возрастанию.
    :raises ValueError: Если формат неверен, шаг не положителен или stop < start.
    """
    parts = text.strip().split(':')
    try:
        values = [Decimal(part.strip()) for part in parts]
    except InvalidOperation as e:
        raise ValueError(f"Нечисловое значение в сетке '{text}'.") from e
    if any(not value.is_finite() for value in values):
        raise ValueError(f"Сетка '{text}' должна состоять из конечных чисел.")

    if len(values) == 1:
        return [float(values[0])]
    if len(values) != 3:
        raise ValueError(f"Ожидался формат start:step:stop, получено '{text}'.")

    start, step, stop = values
    if step <= 0:
        raise ValueError("Шаг сетки должен быть положительным.")
    if stop < start:
        raise ValueError("Конец сетки меньше начала.")

    count = int((stop - start) / step) + 1
    return [float(start + index * step) for index in range(count)]

