"""
Перемежители: внутриблочные (s-random, прямоугольный, внешняя таблица),
межблочная перестановка (IBP) и их композиция в перестановку всего потока.
"""
import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from django.conf import settings

from coding.exceptions import (
    ConfigurationError,
    ConstructionError,
    PermutationError,
    UnrepairableBoundaryError,
)

logger = logging.getLogger(__name__)

BoundaryMode = Literal['wrap', 'clamp']


@dataclass(frozen=True, eq=False)
class Permutation:
    """
    Биективное отображение индексов: ``mapping[i]`` - позиция назначения элемента i.

    Перемежение переносит элемент i в позицию ``mapping[i]``, обратное перемежение
    собирает элементы обратно.
    """

    mapping: np.ndarray
    inverse: np.ndarray

    @classmethod
    def from_mapping(cls, mapping: np.ndarray | list[int]) -> 'Permutation':
        """
        Создаёт перестановку из массива назначений с проверкой биективности.

        :raises PermutationError: Если массив не является перестановкой [0, N).
        """
        mapping = np.array(mapping, dtype=np.int64)
        if mapping.ndim != 1 or not is_bijection(mapping):
            raise PermutationError("Отображение не является биекцией на [0, N).")
        inverse = np.empty_like(mapping)
        inverse[mapping] = np.arange(mapping.size)
        mapping.setflags(write=False)
        inverse.setflags(write=False)
        return cls(mapping=mapping, inverse=inverse)

    @classmethod
    def identity(cls, size: int) -> 'Permutation':
        return cls.from_mapping(np.arange(size))

    @property
    def size(self) -> int:
        return int(self.mapping.size)

    def then(self, other: 'Permutation') -> 'Permutation':
        """Композиция: сначала ``self``, затем ``other``."""
        if other.size != self.size:
            raise PermutationError("Нельзя скомпоновать перестановки разной длины.")
        return Permutation.from_mapping(other.mapping[self.mapping])

    def interleave(self, values: np.ndarray) -> np.ndarray:
        """Переставляет значения по последней оси: ``out[..., mapping[i]] = values[..., i]``."""
        out = np.empty_like(values)
        out[..., self.mapping] = values
        return out

    def deinterleave(self, values: np.ndarray) -> np.ndarray:
        """Обратное перемежение: ``out[..., i] = values[..., mapping[i]]``."""
        return values[..., self.mapping]


def is_bijection(mapping: np.ndarray) -> bool:
    """Проверяет, что отсортированный массив совпадает с [0, N)."""
    mapping = np.asarray(mapping)
    return bool(np.array_equal(np.sort(mapping), np.arange(mapping.size)))


def check_spread(mapping: np.ndarray, spread: int) -> bool:
    """
    Независимая проверка s-random условия за O(L·s).

    Для всех i ≠ j с |i - j| < s должно выполняться |map[i] - map[j]| >= s.
    """
    mapping = np.asarray(mapping, dtype=np.int64)
    for distance in range(1, min(spread, mapping.size)):
        gaps = np.abs(mapping[distance:] - mapping[:-distance])
        if np.any(gaps < spread):
            return False
    return True


def default_spread(block_len: int) -> int:
    """Параметр s по умолчанию: на единицу меньше рекомендуемой границы floor(sqrt(L/2))."""
    return max(1, math.isqrt(block_len // 2) - 1)


@dataclass(frozen=True)
class IbpConfig:
    """Параметры межблочной перестановки."""

    block_len: int
    span: int
    num_blocks: int
    period: int | None = None
    step: int = 1
    boundary_mode: BoundaryMode = 'wrap'

    @property
    def resolved_period(self) -> int:
        """Период T_s, по умолчанию 2S + 1."""
        return self.period if self.period is not None else 2 * self.span + 1

    def validate(self) -> None:
        """
        Проверяет инварианты конфигурации.

        :raises ConfigurationError: С именем параметра в ``field``.
        """
        if self.block_len < 1:
            raise ConfigurationError("Длина блока L должна быть не меньше 1.", 'block_len')
        if self.span < 0:
            raise ConfigurationError("Размах S не может быть отрицательным.", 'span')
        if self.resolved_period < 1:
            raise ConfigurationError("Период T_s должен быть не меньше 1.", 'period')
        if self.num_blocks < 1:
            raise ConfigurationError("Число блоков B должно быть не меньше 1.", 'num_blocks')
        if self.boundary_mode not in ('wrap', 'clamp'):
            raise ConfigurationError(
                f"Неизвестный режим границы '{self.boundary_mode}'.", 'boundary'
            )
        if self.boundary_mode == 'wrap' and self.num_blocks < 2 * self.span + 1:
            raise ConfigurationError(
                f"В режиме wrap требуется B >= 2S+1 = {2 * self.span + 1}, "
                f"получено B={self.num_blocks}.",
                'num_blocks',
            )
        if math.gcd(self.step, 2 * self.span + 1) != 1:
            raise ConfigurationError(
                f"Шаг {self.step} должен быть взаимно прост с 2S+1 = {2 * self.span + 1}.", 'step'
            )


@dataclass(frozen=True)
class IbpRule:
    """Правило смещения блоков δ(j) ∈ [-S, S], зависящее только от позиции j в блоке."""

    span: int
    period: int
    step: int = 1

    def __call__(self, positions: np.ndarray | int) -> np.ndarray:
        positions = np.asarray(positions, dtype=np.int64)
        return ((positions % self.period) * self.step) % (2 * self.span + 1) - self.span

    def table(self, block_len: int) -> np.ndarray:
        """Значения δ для всех позиций блока."""
        return self(np.arange(block_len))


@dataclass(frozen=True, eq=False)
class StreamPermutation:
    """Составная перестановка потока из B блоков по L бит."""

    permutation: Permutation
    block_len: int
    num_blocks: int
    span: int
    boundary_mode: BoundaryMode
    srid_bits: int
    avg_latency_bits: int
    repairs: int = 0

    @property
    def size(self) -> int:
        return self.permutation.size

    def block_displacement(self) -> np.ndarray:
        """Смещение блока назначения для каждого глобального индекса; в режиме wrap - кратчайшее."""
        source_block = np.arange(self.size) // self.block_len
        displacement = self.permutation.mapping // self.block_len - source_block
        if self.boundary_mode == 'wrap':
            half = self.num_blocks // 2
            displacement = (displacement + half) % self.num_blocks - half
        return displacement


@dataclass(frozen=True)
class LatencyReport:
    """Метрики задержки перемежения в битах."""

    srid_bits: int
    avg_latency_bits: int
    classic_equivalent_block: int


def check_span(stream: StreamPermutation) -> bool:
    """Независимая проверка: ни один бит не смещается больше чем на S блоков."""
    source_block = np.arange(stream.size) // stream.block_len
    dest_block = stream.permutation.mapping // stream.block_len
    distance = np.abs(dest_block - source_block)
    if stream.boundary_mode == 'wrap':
        distance = np.minimum(distance, stream.num_blocks - distance)
    return bool(np.all(distance <= stream.span))


def make_srandom(
        block_len: int,
        spread: int,
        seed: int,
        max_restarts: int | None = None,
        ibp: IbpRule | None = None,
) -> Permutation:
    """
    Строит s-random перемежитель случайным выбором с перезапусками.

    Позиции заполняются по порядку; для позиции i берётся первый из оставшихся
    (в случайном порядке) кандидатов, отстоящий не меньше чем на s от назначений
    последних s-1 позиций. Если кандидатов нет, построение начинается заново с новым
    перемешиванием. При заданном правиле ``ibp`` условие дополнительно проверяется
    на стыке соседних блоков после межблочной перестановки.

    :param block_len: Длина блока L.
    :param spread: Параметр разнесения s.
    :param seed: Зерно генератора; результат детерминирован по (L, s, seed).
    :param max_restarts: Число перезапусков, по умолчанию ``settings.SRANDOM_MAX_RESTARTS``.
    :param ibp: Правило межблочного смещения для модифицированного критерия.
    :return: Перестановка длины L.
    :raises ConfigurationError: Если s вне [1, L/2].
    :raises ConstructionError: Если перезапуски исчерпаны.
    """
    if spread < 1 or (spread > 1 and spread > block_len / 2):
        raise ConfigurationError(
            f"Параметр s={spread} вне допустимого диапазона [1, {block_len // 2}].", 'spread'
        )
    max_restarts = settings.SRANDOM_MAX_RESTARTS if max_restarts is None else max_restarts
    rng = np.random.default_rng(seed)
    delta = ibp.table(block_len) if ibp is not None and ibp.span > 0 else None

    for attempt in range(max_restarts + 1):
        mapping = _srandom_attempt(block_len, spread, rng, delta)
        if mapping is not None:
            logger.info(
                f"S-random interleaver built: L={block_len}, s={spread}, seed={seed}, "
                f"restarts={attempt}, ibp_aware={delta is not None}"
            )
            return Permutation.from_mapping(mapping)
        logger.debug(f"S-random attempt {attempt} failed (L={block_len}, s={spread})")

    logger.error(f"S-random construction failed: L={block_len}, s={spread}, restarts={max_restarts}")
    raise ConstructionError(
        f"Не удалось построить s-random перемежитель L={block_len}, s={spread} "
        f"за {max_restarts} перезапусков: параметр s слишком велик.",
        max_restarts,
    )


def _srandom_attempt(
        block_len: int, spread: int, rng: np.random.Generator, delta: np.ndarray | None
) -> np.ndarray | None:
    remaining = rng.permutation(block_len)
    mapping = np.empty(block_len, dtype=np.int64)

    for i in range(block_len):
        ok = np.ones(remaining.size, dtype=bool)
        recent = mapping[max(0, i - spread + 1):i]
        if recent.size:
            ok &= np.all(np.abs(remaining[:, np.newaxis] - recent[np.newaxis, :]) >= spread, axis=1)

        # позиции начала следующего блока, близкие к i по глобальному индексу
        boundary = i + spread - block_len
        if delta is not None and boundary > 0:
            earlier = mapping[:boundary]
            shift = 1 + delta[earlier][np.newaxis, :] - delta[remaining][:, np.newaxis]
            gaps = shift * block_len + earlier[np.newaxis, :] - remaining[:, np.newaxis]
            ok &= np.all(np.abs(gaps) >= spread, axis=1)

        candidates = np.flatnonzero(ok)
        if candidates.size == 0:
            return None
        mapping[i] = remaining[candidates[0]]
        remaining = np.delete(remaining, candidates[0])

    return mapping


def make_rectangular(rows: int, cols: int, block_len: int | None = None) -> Permutation:
    """
    Прямоугольный перемежитель: запись по строкам, чтение по столбцам.

    :raises ConfigurationError: Если rows·cols не равно длине блока.
    """
    if rows < 1 or cols < 1:
        raise ConfigurationError("Размеры прямоугольника должны быть положительны.", 'rows')
    if block_len is not None and rows * cols != block_len:
        raise ConfigurationError(
            f"Размеры {rows}x{cols} не совпадают с длиной блока L={block_len}.", 'rows'
        )
    index = np.arange(rows * cols)
    row, col = np.divmod(index, cols)
    return Permutation.from_mapping(col * rows + row)


def make_ibp(cfg: IbpConfig) -> IbpRule:
    """Строит правило межблочного смещения δ для конфигурации."""
    cfg.validate()
    return IbpRule(span=cfg.span, period=cfg.resolved_period, step=cfg.step)


def compose_stream(intra: Permutation, cfg: IbpConfig) -> StreamPermutation:
    """
    Компонует внутриблочную перестановку и IBP в перестановку всего потока.

    Бит (b, i) сначала переходит в позицию j = intra[i] своего блока, затем в блок
    b + δ(j) с той же позицией j. В режиме wrap номер блока берётся по модулю B,
    в режиме clamp вышедшие за край биты попарно обмениваются со свободными
    позициями того же края.

    :raises ConfigurationError: Если длина intra не совпадает с L.
    :raises UnrepairableBoundaryError: Если коллизии режима clamp не устраняются.
    """
    cfg.validate()
    if intra.size != cfg.block_len:
        raise ConfigurationError(
            f"Длина внутриблочного перемежителя {intra.size} не равна L={cfg.block_len}.", 'block_len'
        )
    rule = make_ibp(cfg)
    block_len, num_blocks = cfg.block_len, cfg.num_blocks
    delta = rule.table(block_len)

    columns = np.broadcast_to(intra.mapping[np.newaxis, :], (num_blocks, block_len))
    dest_block = np.arange(num_blocks)[:, np.newaxis] + delta[columns]

    repairs = 0
    if cfg.boundary_mode == 'wrap':
        dest_block = dest_block % num_blocks
        dest_column = columns
    else:
        dest_block, dest_column, repairs = _repair_clamped(dest_block, columns.copy(), delta, cfg)

    mapping = (dest_block * block_len + dest_column).ravel()
    stream = StreamPermutation(
        permutation=Permutation.from_mapping(mapping),
        block_len=block_len,
        num_blocks=num_blocks,
        span=cfg.span,
        boundary_mode=cfg.boundary_mode,
        srid_bits=(1 + cfg.span) * block_len,
        avg_latency_bits=(1 + cfg.span) * block_len,
        repairs=repairs,
    )
    logger.info(
        f"Stream permutation composed: L={block_len}, S={cfg.span}, T_s={rule.period}, "
        f"B={num_blocks}, mode={cfg.boundary_mode}, repairs={repairs}"
    )
    return stream


def _repair_clamped(
        dest_block: np.ndarray, dest_column: np.ndarray, delta: np.ndarray, cfg: IbpConfig
) -> tuple[np.ndarray, np.ndarray, int]:
    num_blocks = cfg.num_blocks
    block_len = cfg.block_len
    blocks = np.arange(num_blocks)[:, np.newaxis]
    all_columns = np.arange(block_len)[np.newaxis, :]

    # свободны позиции (b', j), прообраз которых b' - δ(j) лежит вне потока
    preimage = blocks - delta[all_columns]
    repairs = 0
    for edge, overflow, free in (
            ('top', dest_block >= num_blocks, preimage >= num_blocks),
            ('bottom', dest_block < 0, preimage < 0),
    ):
        sources = np.argwhere(overflow)
        slots = np.argwhere(free)
        if len(sources) != len(slots):
            logger.error(
                f"Clamp repair impossible at {edge} edge: {len(sources)} overflowing bits, "
                f"{len(slots)} free slots"
            )
            raise UnrepairableBoundaryError(
                f"Режим clamp: на краю '{edge}' {len(sources)} выходящих бит и {len(slots)} "
                f"свободных позиций, попарный обмен невозможен."
            )
        for (block, position), (slot_block, slot_column) in zip(sources, slots, strict=True):
            if abs(block - slot_block) > cfg.span:
                raise UnrepairableBoundaryError(
                    f"Режим clamp: обмен блока {block} с блоком {slot_block} "
                    f"нарушает размах S={cfg.span}."
                )
            dest_block[block, position] = slot_block
            dest_column[block, position] = slot_column
            repairs += 1

    if repairs:
        logger.warning(f"Clamp mode repaired {repairs} boundary collisions")
    return dest_block, dest_column, repairs


def latency_report(cfg: IbpConfig) -> LatencyReport:
    """Задержка однократного перемежения (SRID) и средняя задержка перемежения/обратного перемежения."""
    cfg.validate()
    delay = (1 + cfg.span) * cfg.block_len
    return LatencyReport(srid_bits=delay, avg_latency_bits=delay, classic_equivalent_block=delay)
