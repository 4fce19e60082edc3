"""BPSK-модуляция, AWGN-канал с учётом скорости кода и вычисление канальных LLR."""
import logging
import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from django.conf import settings

from coding.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


class Lane(IntEnum):
    """Номера независимых потоков генератора внутри одного испытания."""

    SOURCE = 0
    SYSTEMATIC = 1
    PARITY1 = 2
    PARITY2 = 3
    TAIL1_SYSTEMATIC = 4
    TAIL1_PARITY = 5
    TAIL2_SYSTEMATIC = 6
    TAIL2_PARITY = 7
    APRIORI = 8


@dataclass(frozen=True)
class ChannelConfig:
    """Параметры AWGN-канала: Eb/N0 в дБ, эффективная скорость кода (с учётом хвостов) и зерно."""

    ebn0_db: float
    code_rate: float
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 < self.code_rate <= 1.0:
            raise ConfigurationError(f"Скорость кода {self.code_rate} вне интервала (0, 1].", 'rate')

    @property
    def noise_variance(self) -> float:
        """σ² = 1 / (2·R·10^(Eb/N0 / 10)); при Eb/N0 = +inf шум отсутствует."""
        self.validate()
        if math.isinf(self.ebn0_db) and self.ebn0_db > 0:
            return 0.0
        return 1.0 / (2.0 * self.code_rate * 10.0 ** (self.ebn0_db / 10.0))


def trial_rng(seed: int, trial: int, lane: int) -> np.random.Generator:
    """
    Генератор на основе счётчика (Philox), ключ которого выводится из (seed, trial, lane).

    Разные испытания и дорожки никогда не делят поток, поэтому результат не зависит
    от порядка и параллельности испытаний.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial, lane])))


def modulate(bits: np.ndarray) -> np.ndarray:
    """BPSK: бит 0 → +1.0, бит 1 → -1.0."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def hard_decision(values: np.ndarray) -> np.ndarray:
    """Жёсткое решение по знаку: неотрицательное значение (в том числе 0) даёт бит 0."""
    return (np.asarray(values) < 0).astype(np.uint8)


def transmit(symbols: np.ndarray, cfg: ChannelConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Добавляет гауссов шум: y = x + n, n ~ N(0, σ²).

    Шум получается из стандартного нормального распределения генератора
    (``Generator.standard_normal``, метод зиккурата) умножением на σ.

    :param symbols: BPSK-символы.
    :param cfg: Параметры канала.
    :param rng: Генератор, обычно ``trial_rng(seed, trial, lane)``.
    """
    symbols = np.asarray(symbols, dtype=np.float64)
    variance = cfg.noise_variance
    if variance == 0.0:
        return symbols.copy()
    return symbols + math.sqrt(variance) * rng.standard_normal(symbols.shape)


def to_llr(received: np.ndarray, noise_variance: float) -> np.ndarray:
    """
    Канальные LLR: 2y/σ².

    При σ² = 0 значения насыщаются до ±``LLR_CLAMP`` со знаком y.
    """
    received = np.asarray(received, dtype=np.float64)
    if noise_variance < 0:
        raise ConfigurationError("Дисперсия шума не может быть отрицательной.", 'ebn0')
    if noise_variance == 0.0:
        return settings.LLR_CLAMP * np.sign(received)
    return 2.0 * received / noise_variance
