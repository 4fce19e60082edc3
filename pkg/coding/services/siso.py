"""
SISO APP-декодер блока RSC-кода: Log-MAP и Max-Log-MAP (BCJR) и вариант со скользящим окном.

Соглашение о знаке: LLR = ln P(bit=0) / P(bit=1), положительное значение - бит 0 вероятнее.
Все функции работают с пачками: дорожки формы ``(K,)`` или ``(n, K)``.
"""
import logging
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from django.conf import settings

from coding.exceptions import ConfigurationError, LaneLengthError
from coding.services.rsc_codec import Trellis

logger = logging.getLogger(__name__)

# Метрика недостижимого состояния: конечная, чтобы max* не давал inf - inf
NEG_METRIC = -1.0e30


class Algorithm(StrEnum):
    """Ядро max* декодера."""

    LOG_MAP = 'logmap'
    MAX_LOG_MAP = 'maxlogmap'


class Boundary(StrEnum):
    """Граничное условие на метрики состояний."""

    KNOWN_ZERO = 'known_zero_state'
    EQUIPROBABLE = 'equiprobable'
    PROVIDED = 'provided'


@dataclass(frozen=True)
class WindowConfig:
    window_len: int
    warmup_len: int


@dataclass(frozen=True)
class DecoderMode:
    """Алгоритм декодирования и (необязательно) параметры скользящего окна."""

    algorithm: Algorithm = Algorithm.LOG_MAP
    window: WindowConfig | None = None

    def validate(self, memory: int) -> None:
        """
        Проверяет параметры окна.

        :raises ConfigurationError: Если W < 1 или W₀ вне [0, W].
        """
        if self.window is None:
            return
        if self.window.window_len < 1:
            raise ConfigurationError("Длина окна должна быть положительной.", 'window')
        if not 0 <= self.window.warmup_len <= self.window.window_len:
            raise ConfigurationError("Длина разгона должна лежать в диапазоне [0, W].", 'warmup')
        if self.window.warmup_len < memory:
            logger.warning(
                f"Warmup length {self.window.warmup_len} is below code memory {memory}; "
                f"window-edge beta metrics will be inaccurate"
            )

    @classmethod
    def default_window(cls, algorithm: Algorithm = Algorithm.LOG_MAP) -> 'DecoderMode':
        """Режим со скользящим окном по умолчанию из настроек."""
        return cls(
            algorithm=algorithm,
            window=WindowConfig(settings.SISO_WINDOW_LEN, settings.SISO_WARMUP_LEN),
        )


@dataclass
class SisoInput:
    """
    Вход SISO-декодера.

    ``alpha_start`` / ``beta_end`` - логарифмические метрики состояний (формы ``(S,)`` или
    ``(n, S)``), используются только при граничном условии ``PROVIDED``.
    """

    llr_systematic: np.ndarray
    llr_parity: np.ndarray
    llr_apriori: np.ndarray
    start: Boundary = Boundary.KNOWN_ZERO
    end: Boundary = Boundary.KNOWN_ZERO
    alpha_start: np.ndarray | None = None
    beta_end: np.ndarray | None = None


@dataclass(frozen=True)
class SisoOutput:
    """Апостериорные и внешние LLR, а также метрики состояний на концах последовательности."""

    llr_posterior: np.ndarray
    llr_extrinsic: np.ndarray
    alpha_end: np.ndarray
    beta_start: np.ndarray


def max_star(a, b, algorithm: Algorithm):
    """
    Ядро max*: ln(e^a + e^b) для Log-MAP, max(a, b) для Max-Log-MAP.

    :param a: Скаляр или массив.
    :param b: Скаляр или массив той же формы.
    :param algorithm: Алгоритм декодирования.
    """
    if algorithm == Algorithm.MAX_LOG_MAP:
        return np.maximum(a, b)
    return np.maximum(a, b) + np.log1p(np.exp(-np.abs(np.subtract(a, b))))


def _max_star_reduce(values: np.ndarray, algorithm: Algorithm) -> np.ndarray:
    """max* по последней оси."""
    peak = np.max(values, axis=-1)
    if algorithm == Algorithm.MAX_LOG_MAP:
        return peak
    return peak + np.log(np.sum(np.exp(values - peak[..., np.newaxis]), axis=-1))


class _TrellisTables:
    """Индексы рёбер решётки в виде, удобном для векторных рекурсий."""

    def __init__(self, trellis: Trellis):
        self.num_states = trellis.num_states
        self.edge_from = trellis.edge_from
        self.edge_to = trellis.edge_to
        self.sign_input = 1.0 - 2.0 * trellis.edge_input
        self.sign_parity = 1.0 - 2.0 * trellis.edge_parity
        # входящие в состояние рёбра: ребро (s, u) имеет номер 2s + u
        self.incoming = trellis.prev_state * 2 + np.array([0, 1])
        self.zero_input_edges = np.flatnonzero(trellis.edge_input == 0)
        self.one_input_edges = np.flatnonzero(trellis.edge_input == 1)

    def branch(self, info: np.ndarray, parity: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Метрики ветвей для одного такта.

        :param info: Сумма систематического и априорного LLR, форма ``(...)``.
        :param parity: LLR проверочного бита той же формы.
        :return: Полная метрика и её проверочная часть, форма ``(..., E)``.
        """
        parity_part = 0.5 * parity[..., np.newaxis] * self.sign_parity
        return 0.5 * info[..., np.newaxis] * self.sign_input + parity_part, parity_part

    def boundary(self, kind: Boundary, provided: np.ndarray | None, batch: int) -> np.ndarray:
        if kind == Boundary.KNOWN_ZERO:
            metrics = np.full((batch, self.num_states), NEG_METRIC)
            metrics[:, 0] = 0.0
            return metrics
        if kind == Boundary.EQUIPROBABLE:
            return np.zeros((batch, self.num_states))
        if provided is None:
            raise ConfigurationError(
                "Для граничного условия 'provided' нужны метрики состояний.", 'boundary'
            )
        metrics = np.broadcast_to(np.asarray(provided, dtype=np.float64), (batch, self.num_states))
        return metrics - np.max(metrics, axis=-1, keepdims=True)


def _normalize(metrics: np.ndarray) -> np.ndarray:
    return metrics - np.max(metrics, axis=-1, keepdims=True)


def _prepare(siso_input: SisoInput) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
    lanes = [
        np.asarray(lane, dtype=np.float64)
        for lane in (siso_input.llr_systematic, siso_input.llr_parity, siso_input.llr_apriori)
    ]
    single = lanes[0].ndim == 1
    lanes = [np.atleast_2d(lane) for lane in lanes]
    if any(lane.shape != lanes[0].shape for lane in lanes) or lanes[0].ndim != 2:
        raise LaneLengthError(
            f"Длины LLR-дорожек не совпадают: {[lane.shape for lane in lanes]}."
        )
    if lanes[0].shape[1] < 1:
        raise LaneLengthError("Пустая последовательность на входе декодера.")
    if any(np.isnan(lane).any() for lane in lanes):
        raise LaneLengthError("NaN во входных LLR декодера.")
    clamp = settings.LLR_CLAMP
    systematic, parity, apriori = (np.clip(lane, -clamp, clamp) for lane in lanes)
    return systematic, parity, apriori, single


def _forward(
        info: np.ndarray, parity: np.ndarray, alpha0: np.ndarray,
        tables: _TrellisTables, algorithm: Algorithm,
) -> np.ndarray:
    """Прямая рекурсия, возвращает нормированные alpha формы ``(n, K + 1, S)``."""
    batch, length = info.shape
    alpha = np.empty((batch, length + 1, tables.num_states))
    alpha[:, 0] = alpha0
    for k in range(length):
        gamma, _ = tables.branch(info[:, k], parity[:, k])
        edge_metric = alpha[:, k, tables.edge_from] + gamma
        alpha[:, k + 1] = _normalize(max_star(
            edge_metric[:, tables.incoming[:, 0]], edge_metric[:, tables.incoming[:, 1]], algorithm
        ))
    return alpha


def _backward_step(
        beta_next: np.ndarray, gamma: np.ndarray, tables: _TrellisTables, algorithm: Algorithm
) -> np.ndarray:
    edge_metric = beta_next[..., tables.edge_to] + gamma
    return _normalize(max_star(edge_metric[..., 0::2], edge_metric[..., 1::2], algorithm))


def _decode(
        siso_input: SisoInput, trellis: Trellis, algorithm: Algorithm, window_len: int, warmup_len: int,
) -> SisoOutput:
    systematic, parity, apriori, single = _prepare(siso_input)
    batch, length = systematic.shape
    tables = _TrellisTables(trellis)
    info = systematic + apriori

    alpha0 = tables.boundary(siso_input.start, siso_input.alpha_start, batch)
    beta_final = tables.boundary(siso_input.end, siso_input.beta_end, batch)
    alpha = _forward(info, parity, alpha0, tables, algorithm)

    # окна [start, stop), обратная рекурсия каждого окна стартует с warm_end
    starts = np.arange(0, length, window_len)
    stops = np.minimum(starts + window_len, length)
    warm_ends = np.minimum(stops + warmup_len, length)
    at_end = warm_ends == length

    beta = np.where(at_end[np.newaxis, :, np.newaxis], beta_final[:, np.newaxis, :], 0.0)
    extrinsic = np.empty((batch, length))
    rows = np.arange(batch)[:, np.newaxis]

    for step in range(int(np.max(warm_ends - starts))):
        position = warm_ends - 1 - step
        active = position >= starts
        index = np.where(active, position, 0)
        gamma, parity_part = tables.branch(info[:, index], parity[:, index])

        consumed = active & (position < stops)
        if consumed.any():
            # вклад систематики и априорной информации одинаков во всех рёбрах с тем же входом
            metric = (alpha[rows, index][..., tables.edge_from] + parity_part
                      + beta[..., tables.edge_to])
            llr = (_max_star_reduce(metric[..., tables.zero_input_edges], algorithm)
                   - _max_star_reduce(metric[..., tables.one_input_edges], algorithm))
            extrinsic[:, position[consumed]] = llr[:, consumed]

        beta = np.where(
            active[np.newaxis, :, np.newaxis], _backward_step(beta, gamma, tables, algorithm), beta
        )

    posterior = extrinsic + apriori + systematic
    output = SisoOutput(
        llr_posterior=posterior,
        llr_extrinsic=extrinsic,
        alpha_end=alpha[:, length],
        beta_start=beta[:, 0],
    )
    if single:
        output = SisoOutput(
            llr_posterior=posterior[0],
            llr_extrinsic=extrinsic[0],
            alpha_end=output.alpha_end[0],
            beta_start=output.beta_start[0],
        )
    return output


def app_decode(siso_input: SisoInput, trellis: Trellis, mode: DecoderMode | None = None) -> SisoOutput:
    """
    Полный BCJR по всей последовательности (одно окно без разгона).

    :param siso_input: Систематическая, проверочная и априорная дорожки и граничные условия.
    :param trellis: Решётка компонентного кода.
    :param mode: Алгоритм; параметры окна игнорируются.
    :return: Апостериорные и внешние LLR, метрики состояний на концах.
    :raises LaneLengthError: При несовпадении длин дорожек или NaN на входе.
    """
    mode = mode or DecoderMode()
    length = np.atleast_2d(np.asarray(siso_input.llr_systematic)).shape[-1]
    return _decode(siso_input, trellis, mode.algorithm, max(length, 1), 0)


def sliding_window_decode(siso_input: SisoInput, trellis: Trellis, mode: DecoderMode) -> SisoOutput:
    """
    BCJR со скользящим окном.

    Alpha считается непрерывно по всей последовательности. Последовательность
    разбивается на окна длины W; beta каждого окна стартует с равновероятных метрик
    через W₀ тактов после конца окна (или с истинной границы, если она ближе) и
    прогревается на этих тактах до того, как метрики используются. Обратные рекурсии
    всех окон выполняются одновременно.

    :raises ConfigurationError: Если окно не задано или K < W.
    """
    if mode.window is None:
        raise ConfigurationError("Для декодирования скользящим окном нужны параметры окна.", 'window')
    mode.validate(trellis.memory)
    length = np.atleast_2d(np.asarray(siso_input.llr_systematic)).shape[-1]
    if length < mode.window.window_len:
        raise ConfigurationError(
            f"Длина последовательности {length} меньше окна W={mode.window.window_len}.", 'window'
        )
    return _decode(siso_input, trellis, mode.algorithm, mode.window.window_len, mode.window.warmup_len)


def decode(siso_input: SisoInput, trellis: Trellis, mode: DecoderMode) -> SisoOutput:
    """Выбирает полный или оконный BCJR по режиму; короткие последовательности декодируются целиком."""
    length = np.atleast_2d(np.asarray(siso_input.llr_systematic)).shape[-1]
    if mode.window is None or length <= mode.window.window_len:
        return app_decode(siso_input, trellis, mode)
    return sliding_window_decode(siso_input, trellis, mode)


def circular_boundaries(
        siso_input: SisoInput, trellis: Trellis, mode: DecoderMode
) -> tuple[np.ndarray, np.ndarray]:
    """
    Приближённые граничные метрики для tail-biting блока: один прогревочный круг.

    Alpha прогоняется по блоку от равновероятных метрик, её значение в конце блока
    становится начальной метрикой; beta аналогично прогоняется в обратную сторону.

    :return: Пара (alpha_start, beta_end) формы ``(n, S)``.
    """
    systematic, parity, apriori, _ = _prepare(siso_input)
    tables = _TrellisTables(trellis)
    info = systematic + apriori
    batch, length = info.shape

    alpha = _forward(info, parity, np.zeros((batch, tables.num_states)), tables, mode.algorithm)
    beta = np.zeros((batch, tables.num_states))
    for k in range(length - 1, -1, -1):
        gamma, _ = tables.branch(info[:, k], parity[:, k])
        beta = _backward_step(beta, gamma, tables, mode.algorithm)
    return alpha[:, length], beta
