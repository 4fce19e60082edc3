"""Рекурсивный систематический свёрточный (RSC) кодер и построение решётки."""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from coding.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

MAX_MEMORY = 16

# 3GPP: G(D) = (1 + D + D^3) / (1 + D^2 + D^3), бит k маски - коэффициент при D^k
DEFAULT_FEEDBACK_TAPS = 0b1101
DEFAULT_FORWARD_TAPS = 0b1011
DEFAULT_MEMORY = 3


@dataclass(frozen=True)
class GeneratorConfig:
    """Порождающие полиномы RSC-кода в виде битовых масок по степеням D⁰..Dᵐ."""

    feedback_taps: int = DEFAULT_FEEDBACK_TAPS
    forward_taps: int = DEFAULT_FORWARD_TAPS
    memory: int = DEFAULT_MEMORY

    def validate(self) -> None:
        """
        Проверяет инварианты конфигурации.

        :raises ConfigurationError: Если память вне диапазона [1, 16], у полиномов
                                    не выставлен коэффициент D⁰ или маска длиннее m + 1 бит.
        """
        if not 1 <= self.memory <= MAX_MEMORY:
            raise ConfigurationError(
                f"Память кода должна лежать в диапазоне [1, {MAX_MEMORY}], получено {self.memory}.",
                'memory',
            )
        for name in ('feedback_taps', 'forward_taps'):
            taps = getattr(self, name)
            if taps <= 0 or not taps & 1:
                raise ConfigurationError(f"У полинома {name} должен быть коэффициент D^0.", name)
            if taps >> (self.memory + 1):
                raise ConfigurationError(
                    f"Полином {name}={taps:#b} не помещается в память m={self.memory}.", name
                )

    @property
    def num_states(self) -> int:
        return 1 << self.memory


@dataclass(frozen=True, eq=False)
class Trellis:
    """
    Таблица переходов решётки RSC-кода.

    Состояние хранит содержимое регистра: бит k-1 - значение w, задержанное на k тактов.
    Все массивы индексируются как ``[state, input_bit]``.
    """

    memory: int
    num_states: int
    next_state: np.ndarray
    parity: np.ndarray
    prev_state: np.ndarray
    tail_input: np.ndarray
    encoder_period: int
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)

    @property
    def edge_from(self) -> np.ndarray:
        """Начальные состояния всех 2·S рёбер в порядке (state, input)."""
        return np.repeat(np.arange(self.num_states), 2)

    @property
    def edge_input(self) -> np.ndarray:
        return np.tile(np.array([0, 1], dtype=np.uint8), self.num_states)

    @property
    def edge_to(self) -> np.ndarray:
        return self.next_state.ravel()

    @property
    def edge_parity(self) -> np.ndarray:
        return self.parity.ravel()


@dataclass(frozen=True)
class EncodedBlock:
    """Результат кодирования одного блока."""

    systematic: np.ndarray
    parity: np.ndarray
    final_state: int
    tail_systematic: np.ndarray | None = None
    tail_parity: np.ndarray | None = None

    @property
    def terminated(self) -> bool:
        return self.tail_systematic is not None


@dataclass(frozen=True)
class EncodedBatch:
    """Результат кодирования пачки независимых блоков, массивы формы ``(n, L)`` и ``(n, m)``."""

    systematic: np.ndarray
    parity: np.ndarray
    final_states: np.ndarray
    tail_systematic: np.ndarray | None = None
    tail_parity: np.ndarray | None = None

    def block(self, index: int) -> EncodedBlock:
        """Возвращает строку пачки как отдельный ``EncodedBlock``."""
        return EncodedBlock(
            systematic=self.systematic[index],
            parity=self.parity[index],
            final_state=int(self.final_states[index]),
            tail_systematic=None if self.tail_systematic is None else self.tail_systematic[index],
            tail_parity=None if self.tail_parity is None else self.tail_parity[index],
        )


def _parity_of(value: int) -> int:
    return bin(value).count('1') & 1


def _autonomous_period(next_zero: np.ndarray) -> int:
    """
    Вычисляет период автономной (при нулевом входе) рекуррентности состояний.

    Из каждого ненулевого состояния рекуррентность прогоняется до первого повтора,
    период - НОК длин найденных циклов.
    """
    period = 1
    for start in range(1, len(next_zero)):
        seen: dict[int, int] = {}
        state, step = start, 0
        while state not in seen:
            seen[state] = step
            state = int(next_zero[state])
            step += 1
        period = math.lcm(period, step - seen[state])
    return period


def build_trellis(g: GeneratorConfig | None = None) -> Trellis:
    """
    Табулирует решётку RSC-кода.

    :param g: Порождающие полиномы; по умолчанию код 3GPP с памятью 3.
    :return: Неизменяемая решётка с прямыми и обратными переходами, битами
             хвоста и периодом кодера T_c.
    :raises ConfigurationError: Если конфигурация полиномов некорректна.
    """
    g = g or GeneratorConfig()
    g.validate()

    num_states = g.num_states
    mask = num_states - 1
    feedback_reg = g.feedback_taps >> 1
    forward_reg = g.forward_taps >> 1

    next_state = np.empty((num_states, 2), dtype=np.int64)
    parity = np.empty((num_states, 2), dtype=np.uint8)
    prev_state = np.empty((num_states, 2), dtype=np.int64)
    tail_input = np.empty(num_states, dtype=np.uint8)

    for state in range(num_states):
        feedback = _parity_of(state & feedback_reg)
        tail_input[state] = feedback
        for bit in (0, 1):
            w = bit ^ feedback
            next_state[state, bit] = ((state << 1) | w) & mask
            parity[state, bit] = w ^ _parity_of(state & forward_reg)
            prev_state[next_state[state, bit], bit] = state

    encoder_period = _autonomous_period(next_state[:, 0])
    logger.info(
        f"Trellis built: feedback={g.feedback_taps:#b}, forward={g.forward_taps:#b}, "
        f"states={num_states}, encoder period T_c={encoder_period}"
    )
    return Trellis(
        memory=g.memory,
        num_states=num_states,
        next_state=next_state,
        parity=parity,
        prev_state=prev_state,
        tail_input=tail_input,
        encoder_period=encoder_period,
        generator=g,
    )


def encode_batch(
        bits: np.ndarray,
        trellis: Trellis,
        initial_states: np.ndarray | int = 0,
        terminate: bool = False,
) -> EncodedBatch:
    """
    Кодирует пачку независимых блоков, один такт решётки за шаг для всех строк сразу.

    :param bits: Информационные биты формы ``(n, L)``.
    :param trellis: Решётка кода.
    :param initial_states: Начальные состояния строк (скаляр или массив длины n).
    :param terminate: Дописывать ли m хвостовых тактов, переводящих кодер в состояние 0.
    :return: Пачка закодированных блоков.
    """
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    n, length = bits.shape
    state = np.broadcast_to(np.asarray(initial_states, dtype=np.int64), (n,)).copy()
    if np.any((state < 0) | (state >= trellis.num_states)):
        raise ConfigurationError("Начальное состояние вне диапазона решётки.", 'initial_state')

    parity = np.empty_like(bits)
    for k in range(length):
        u = bits[:, k]
        parity[:, k] = trellis.parity[state, u]
        state = trellis.next_state[state, u]

    tail_systematic = tail_parity = None
    if terminate:
        tail_systematic = np.empty((n, trellis.memory), dtype=np.uint8)
        tail_parity = np.empty((n, trellis.memory), dtype=np.uint8)
        for k in range(trellis.memory):
            u = trellis.tail_input[state]
            tail_systematic[:, k] = u
            tail_parity[:, k] = trellis.parity[state, u]
            state = trellis.next_state[state, u]

    return EncodedBatch(
        systematic=bits.copy(),
        parity=parity,
        final_states=state,
        tail_systematic=tail_systematic,
        tail_parity=tail_parity,
    )


def encode_block(
        bits: np.ndarray, initial_state: int, terminate: bool, trellis: Trellis
) -> EncodedBlock:
    """
    Кодирует один блок из L бит.

    :param bits: Информационные биты, индекс 0 - самый ранний во времени.
    :param initial_state: Начальное состояние кодера.
    :param terminate: Завершать ли блок хвостом (m бит обратной связи).
    :param trellis: Решётка кода.
    :return: Систематическая и проверочная дорожки, хвост и конечное состояние.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1 or bits.size < 1:
        raise ConfigurationError("Блок должен быть непустой последовательностью бит.", 'bits')
    return encode_batch(bits[np.newaxis, :], trellis, initial_state, terminate).block(0)


def circular_state_table(length: int, trellis: Trellis) -> np.ndarray:
    """
    Строит таблицу циклического (tail-biting) начального состояния для блоков длины L.

    Индекс таблицы - конечное состояние кодера, запущенного из нуля; значение -
    начальное состояние s, при котором конечное состояние совпадает с s.

    :raises ConfigurationError: Если L кратна периоду кодера и циклическое состояние не единственно.
    """
    states = np.arange(trellis.num_states)
    autonomous = states.copy()
    for _ in range(length % trellis.encoder_period):
        autonomous = trellis.next_state[autonomous, 0]

    image = states ^ autonomous
    if len(np.unique(image)) != trellis.num_states:
        raise ConfigurationError(
            f"Tail-biting невозможен: длина блока {length} кратна периоду кодера "
            f"{trellis.encoder_period}.",
            'block_len',
        )
    table = np.empty(trellis.num_states, dtype=np.int64)
    table[image] = states
    return table


def encode_tailbiting_batch(bits: np.ndarray, trellis: Trellis) -> EncodedBatch:
    """
    Кодирует пачку блоков в режиме tail-biting стандартным двухпроходным методом.

    Первый проход из нулевого состояния даёт конечное состояние отклика на вход,
    по нему из таблицы выбирается циклическое состояние, второй проход стартует из него.
    """
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    zero_state_pass = encode_batch(bits, trellis)
    table = circular_state_table(bits.shape[1], trellis)
    circular = table[zero_state_pass.final_states]
    encoded = encode_batch(bits, trellis, initial_states=circular)
    assert np.array_equal(encoded.final_states, circular), "tail-biting state mismatch"
    return encoded
