"""
Экспериментальный стенд: BER/FER-свипы с правилом остановки, EXIT-диаграммы,
эволюция SNR внешней информации и ковариация вход/выход компонентных декодеров.

Каждое испытание - один поток из B блоков с собственными потоками генератора
(seed, trial, lane). Испытания выполняются пачками фиксированного размера
``BER_TRIAL_BATCH``; правило остановки проверяется только между пачками, поэтому
результат не зависит от числа потоков.
"""
import logging
import math
import os
import time
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import TypeVar

import numpy as np
from django.conf import settings

from coding.services.channel import ChannelConfig, Lane, modulate, trial_rng
from coding.services.factories import create_turbo_codec
from coding.services.turbo import DecodeDiagnostics, TurboCodec, TurboConfig
from experiments.services.mutual_information import (
    consistent_gaussian_llr,
    estimate_mutual_information,
    j_inverse,
    pearson,
    snr_of,
)

logger = logging.getLogger(__name__)

T = TypeVar('T')


@dataclass(frozen=True)
class StopRule:
    """Правило остановки точки BER: не больше max_blocks кадров, но не раньше min_bit_errors ошибок."""

    max_blocks: int
    min_bit_errors: int

    @classmethod
    def from_settings(cls) -> 'StopRule':
        return cls(max_blocks=settings.BER_MAX_BLOCKS, min_bit_errors=settings.BER_MIN_BIT_ERRORS)


@dataclass
class BerResult:
    """Итог одной точки Eb/N0. Кадр - один блок из L информационных бит."""

    ebn0_db: float
    bits_simulated: int = 0
    bit_errors: int = 0
    frames: int = 0
    frame_errors: int = 0
    mean_iterations: float = 0.0
    wall_seconds: float = 0.0
    under_sampled: bool = False

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_simulated if self.bits_simulated else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    def as_row(self, timing: bool = False) -> tuple:
        """Строка CSV; время пишется только по запросу, иначе 0.000. Последний столбец - флаг 0/1."""
        return (
            self.ebn0_db, self.bits_simulated, self.bit_errors, self.ber, self.frames,
            self.frame_errors, self.fer, self.mean_iterations,
            f"{self.wall_seconds if timing else 0.0:.3f}", self.under_sampled,
        )


@dataclass(frozen=True)
class ExitPoint:
    ia: float
    ie: float
    snr_db: float
    constituent: int

    def as_row(self) -> tuple:
        return self.ia, self.ie, self.snr_db, self.constituent


@dataclass
class EvolutionTrace:
    """Значения по итерациям для обеих компонент: ``values[i] = (компонента 1, компонента 2)``."""

    kind: str
    values: list[tuple[float, float]] = field(default_factory=list)

    def rows(self, constituents: Sequence[int] = (1, 2)) -> list[tuple[int, float, int]]:
        """Строки CSV (iteration, value, constituent) для выбранных компонент."""
        return [
            (iteration, value, constituent)
            for iteration, pair in enumerate(self.values, start=1)
            for constituent, value in enumerate(pair, start=1)
            if constituent in constituents
        ]


@dataclass(frozen=True)
class LatencyBracket:
    """Классические длины блока, между которыми лежит кривая исследуемого кода."""

    worse_block_len: int | None
    better_block_len: int | None


@dataclass(frozen=True)
class _BerOutcome:
    bit_errors: int
    frame_errors: int
    release_sum: int


@dataclass(frozen=True)
class _TrialMessages:
    bits: np.ndarray
    diagnostics: DecodeDiagnostics


def resolve_threads(threads: int | None = None) -> int:
    """Число рабочих потоков: явное значение или ``IBPTC_THREADS``; 0 означает число ядер."""
    threads = settings.IBPTC_THREADS if threads is None else threads
    return threads if threads > 0 else (os.cpu_count() or 1)


class ExperimentRunner:
    """
    Запускает испытания одного кодека.

    Все случайные величины выводятся из мастер-зерна: информационные биты - из
    дорожки SOURCE, шум - из дорожек кодового слова, априорная информация EXIT -
    из дорожки APRIORI.
    """

    def __init__(self, codec: TurboCodec, seed: int, threads: int | None = None):
        """
        Инициализирует стенд.

        :param codec: Собранный кодек.
        :param seed: Мастер-зерно.
        :param threads: Число рабочих потоков; по умолчанию из настроек.
        """
        self.codec = codec
        self.seed = seed
        self.threads = resolve_threads(threads)

    def _map(self, function: Callable[[int], T], trials: Iterable[int]) -> list[T]:
        """Выполняет испытания параллельно; порядок результатов совпадает с порядком испытаний."""
        trials = list(trials)
        if self.threads == 1 or len(trials) == 1:
            return [function(trial) for trial in trials]
        with ThreadPoolExecutor(max_workers=min(self.threads, len(trials))) as executor:
            return list(executor.map(function, trials))

    def _channel(self, ebn0_db: float) -> ChannelConfig:
        return ChannelConfig(ebn0_db=ebn0_db, code_rate=self.codec.effective_rate, seed=self.seed)

    def source_bits(self, trial: int) -> np.ndarray:
        rng = trial_rng(self.seed, trial, Lane.SOURCE)
        return rng.integers(0, 2, size=self.codec.stream_len, dtype=np.uint8)

    def _ber_trial(self, channel: ChannelConfig, trial: int) -> _BerOutcome:
        bits = self.source_bits(trial)
        llrs = self.codec.transmit(self.codec.encode_stream(bits), channel, trial)
        decoded, diagnostics = self.codec.decode_stream(llrs)
        errors = (decoded != bits).reshape(self.codec.config.num_blocks, -1)
        return _BerOutcome(
            bit_errors=int(errors.sum()),
            frame_errors=int(errors.any(axis=1).sum()),
            release_sum=int(sum(diagnostics.release_trace)),
        )

    def run_ber(self, ebn0_grid: Sequence[float], stop: StopRule) -> list[BerResult]:
        """
        BER/FER-свип по сетке Eb/N0.

        В каждой точке испытания идут пачками, пока не набрано min_bit_errors ошибок
        или не исчерпан бюджет max_blocks кадров. Ошибки считаются только по
        информационным битам.

        :return: Результаты по точкам сетки в исходном порядке.
        """
        num_blocks = self.codec.config.num_blocks
        trials_cap = max(1, math.ceil(stop.max_blocks / num_blocks))
        batch_size = settings.BER_TRIAL_BATCH
        results = []

        for ebn0_db in ebn0_grid:
            channel = self._channel(ebn0_db)
            result = BerResult(ebn0_db=ebn0_db)
            release_sum = 0
            started = time.perf_counter()
            trial = 0
            while trial < trials_cap and result.bit_errors < stop.min_bit_errors:
                batch = range(trial, min(trial + batch_size, trials_cap))
                for outcome in self._map(partial(self._ber_trial, channel), batch):
                    result.bit_errors += outcome.bit_errors
                    result.frame_errors += outcome.frame_errors
                    release_sum += outcome.release_sum
                trial = batch.stop

            result.frames = trial * num_blocks
            result.bits_simulated = trial * self.codec.stream_len
            result.mean_iterations = release_sum / result.frames
            result.wall_seconds = time.perf_counter() - started
            result.under_sampled = result.bit_errors < stop.min_bit_errors
            if result.under_sampled and result.bit_errors:
                logger.warning(
                    f"Eb/N0={ebn0_db} dB under-sampled: {result.bit_errors} bit errors "
                    f"(< {stop.min_bit_errors}) in {result.frames} frames"
                )
            logger.info(
                f"Eb/N0={ebn0_db} dB: BER={result.ber:.3e}, FER={result.fer:.3e}, "
                f"frames={result.frames}, {result.wall_seconds:.1f}s"
            )
            results.append(result)
        return results

    def _exit_trial(self, channel: ChannelConfig, sigma: float, trial: int) -> tuple[np.ndarray, ...]:
        codec = self.codec
        perm = codec.permutation.permutation
        bits = self.source_bits(trial)
        llrs = codec.transmit(codec.encode_stream(bits), channel, trial)
        rng = trial_rng(self.seed, trial, Lane.APRIORI)

        permuted_bits = perm.interleave(bits)
        first = codec.constituent_decode(
            llrs.systematic, llrs.parity1, consistent_gaussian_llr(bits, sigma, rng),
            llrs.tail1_systematic, llrs.tail1_parity,
        )
        second = codec.constituent_decode(
            perm.interleave(llrs.systematic), llrs.parity2,
            consistent_gaussian_llr(permuted_bits, sigma, rng),
            llrs.tail2_systematic, llrs.tail2_parity,
        )
        clamp = settings.LLR_CLAMP
        return (bits, np.clip(first.extrinsic, -clamp, clamp),
                permuted_bits, np.clip(second.extrinsic, -clamp, clamp))

    def exit_chart(
            self, ebn0_db: float, ia_grid: Sequence[float], samples_per_point: int
    ) -> list[ExitPoint]:
        """
        EXIT-характеристики обеих компонент по гауссовой модели априорной информации.

        Для каждого ia находится σ_A = J⁻¹(ia); априорные LLR берутся из согласованной
        гауссовой модели, выполняется одно декодирование компоненты, ie оценивается
        по выборке внешних LLR.

        :raises ConvergenceError: Если J⁻¹ не сошлось.
        """
        channel = self._channel(ebn0_db)
        trials = max(1, math.ceil(samples_per_point / self.codec.stream_len))
        curves: dict[int, list[ExitPoint]] = {1: [], 2: []}

        for ia in ia_grid:
            sigma = j_inverse(ia)
            outcomes = self._map(partial(self._exit_trial, channel, sigma), range(trials))
            bits1, ext1, bits2, ext2 = (np.concatenate(parts) for parts in zip(*outcomes, strict=True))
            curves[1].append(ExitPoint(ia, estimate_mutual_information(ext1, bits1), ebn0_db, 1))
            curves[2].append(ExitPoint(ia, estimate_mutual_information(ext2, bits2), ebn0_db, 2))
            logger.debug(f"EXIT ia={ia}: ie=({curves[1][-1].ie:.4f}, {curves[2][-1].ie:.4f})")

        return curves[1] + curves[2]

    def _message_trial(self, channel: ChannelConfig, trial: int) -> _TrialMessages:
        bits = self.source_bits(trial)
        llrs = self.codec.transmit(self.codec.encode_stream(bits), channel, trial)
        _, diagnostics = self.codec.decode_stream(llrs, truth=bits, record_messages=True)
        return _TrialMessages(bits=bits, diagnostics=diagnostics)

    def _pooled(self, ebn0_db: float, trials: int) -> tuple[np.ndarray, list]:
        """Собирает сообщения всех испытаний: биты и по итерациям пары (априорные, внешние) массивы."""
        channel = self._channel(ebn0_db)
        outcomes = self._map(partial(self._message_trial, channel), range(trials))
        bits = np.concatenate([outcome.bits for outcome in outcomes])
        per_iteration = []
        for iteration in range(self.codec.config.iterations):
            messages = [outcome.diagnostics.messages[iteration] for outcome in outcomes]
            per_iteration.append(tuple(
                (
                    np.concatenate([message.apriori[index] for message in messages]),
                    np.concatenate([message.extrinsic[index] for message in messages]),
                )
                for index in (0, 1)
            ))
        return bits, per_iteration

    def exit_trajectory(self, ebn0_db: float, trials: int) -> list[ExitPoint]:
        """
        Траектория реального итеративного декодирования в координатах (ia, ie).

        В отличие от ``exit_chart`` априорная информация - это фактические сообщения
        другой компоненты, поэтому траектория зависит от перемежителя.
        """
        bits, per_iteration = self._pooled(ebn0_db, trials)
        points = []
        for pair in per_iteration:
            for constituent, (apriori, extrinsic) in enumerate(pair, start=1):
                points.append(ExitPoint(
                    ia=estimate_mutual_information(apriori, bits),
                    ie=estimate_mutual_information(extrinsic, bits),
                    snr_db=ebn0_db,
                    constituent=constituent,
                ))
        return points

    def snr_evolution(self, ebn0_db: float, trials: int) -> EvolutionTrace:
        """SNR внешней информации по итерациям (LLR со скорректированным знаком)."""
        bits, per_iteration = self._pooled(ebn0_db, trials)
        signs = modulate(bits)
        trace = EvolutionTrace(kind='snr')
        for pair in per_iteration:
            trace.values.append((snr_of(signs * pair[0][1]), snr_of(signs * pair[1][1])))
        return trace

    def extrinsic_covariance(self, ebn0_db: float, trials: int) -> EvolutionTrace:
        """Корреляция Пирсона между априорным входом и внешним выходом каждой компоненты."""
        bits, per_iteration = self._pooled(ebn0_db, trials)
        signs = modulate(bits)
        trace = EvolutionTrace(kind='covariance')
        for pair in per_iteration:
            trace.values.append(tuple(
                pearson(signs * apriori, signs * extrinsic) for apriori, extrinsic in pair
            ))
        return trace


def run_ber(
        cfg: TurboConfig, ebn0_grid: Sequence[float], stop: StopRule, seed: int = 0
) -> list[BerResult]:
    """BER-свип для конфигурации (кодек собирается фабрикой)."""
    return ExperimentRunner(create_turbo_codec(cfg), seed).run_ber(ebn0_grid, stop)


def exit_chart(
        cfg: TurboConfig, snr_db: float, ia_grid: Sequence[float], samples_per_point: int, seed: int = 0
) -> list[ExitPoint]:
    runner = ExperimentRunner(create_turbo_codec(cfg), seed)
    return runner.exit_chart(snr_db, ia_grid, samples_per_point)


def snr_evolution(cfg: TurboConfig, ebn0_db: float, trials: int, seed: int = 0) -> EvolutionTrace:
    return ExperimentRunner(create_turbo_codec(cfg), seed).snr_evolution(ebn0_db, trials)


def extrinsic_covariance(
        cfg: TurboConfig, ebn0_db: float, trials: int, seed: int = 0
) -> EvolutionTrace:
    return ExperimentRunner(create_turbo_codec(cfg), seed).extrinsic_covariance(ebn0_db, trials)


def crossing_ebn0(results: Sequence[BerResult], target_ber: float) -> float | None:
    """
    Eb/N0, при котором кривая BER пересекает target_ber (лог-линейная интерполяция).

    Точки с нулевым BER не участвуют. Возвращает None, если пересечения нет.
    """
    points = [(result.ebn0_db, result.ber) for result in results if result.ber > 0.0]
    for (x0, y0), (x1, y1) in zip(points, points[1:], strict=False):
        if y0 >= target_ber >= y1 and y0 != y1:
            fraction = (math.log10(y0) - math.log10(target_ber)) / (math.log10(y0) - math.log10(y1))
            return x0 + fraction * (x1 - x0)
    return None


def ebn0_gap(
        reference: Sequence[BerResult], candidate: Sequence[BerResult], target_ber: float
) -> float | None:
    """Выигрыш кандидата в дБ на уровне target_ber (положительный - кандидат лучше)."""
    reference_point = crossing_ebn0(reference, target_ber)
    candidate_point = crossing_ebn0(candidate, target_ber)
    if reference_point is None or candidate_point is None:
        return None
    return reference_point - candidate_point


def waterfall_slope(results: Sequence[BerResult], min_errors: int | None = None) -> float | None:
    """Крутизна водопада: декад BER на дБ между двумя последними достоверными точками."""
    min_errors = settings.BER_MIN_BIT_ERRORS if min_errors is None else min_errors
    reliable = [result for result in results if result.bit_errors >= min_errors and result.ber > 0.0]
    if len(reliable) < 2:
        return None
    first, last = reliable[-2], reliable[-1]
    return (math.log10(first.ber) - math.log10(last.ber)) / (last.ebn0_db - first.ebn0_db)


def latency_equivalence(
        candidate: Sequence[BerResult],
        classic_by_block_len: dict[int, Sequence[BerResult]],
        target_ber: float,
) -> LatencyBracket:
    """
    Находит классические длины блока, между которыми лежит кандидат на уровне target_ber.

    ``worse_block_len`` - наибольшая длина, ещё уступающая кандидату,
    ``better_block_len`` - наименьшая длина, не уступающая ему.
    """
    candidate_point = crossing_ebn0(candidate, target_ber)
    worse = better = None
    if candidate_point is None:
        return LatencyBracket(worse, better)
    for block_len in sorted(classic_by_block_len):
        point = crossing_ebn0(classic_by_block_len[block_len], target_ber)
        if point is None:
            continue
        if point > candidate_point:
            worse = block_len
        elif better is None:
            better = block_len
    return LatencyBracket(worse, better)
