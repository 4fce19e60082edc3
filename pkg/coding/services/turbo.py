"""
Турбо-кодек потока с межблочным перемежением (IBPTC).

Две одинаковые RSC-компоненты: первая кодирует поток в естественном порядке,
вторая - поток после составной перестановки. Варианты потока:

* TP - каждый блок кодируется независимо и завершается хвостом (обе компоненты);
* TB - каждый блок кодируется в режиме tail-biting;
* C  - состояние переносится между блоками, поток завершается хвостом один раз в конце.
"""
import logging
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from django.conf import settings

from coding.exceptions import ConfigurationError, LaneLengthError
from coding.services import siso
from coding.services.channel import (
    ChannelConfig,
    Lane,
    hard_decision,
    modulate,
    to_llr,
    transmit,
    trial_rng,
)
from coding.services.interleave import IbpConfig, StreamPermutation
from coding.services.rsc_codec import (
    EncodedBatch,
    GeneratorConfig,
    Trellis,
    circular_state_table,
    encode_batch,
    encode_tailbiting_batch,
)
from coding.services.siso import DecoderMode, SisoInput

logger = logging.getLogger(__name__)


class Variant(StrEnum):
    """Вариант кодирования потока."""

    TAIL_PADDED = 'TP'
    TAIL_BITING = 'TB'
    CONTINUOUS = 'C'


class Rate(StrEnum):
    THIRD = '1/3'
    HALF = '1/2'


class IntraKind(StrEnum):
    """Тип внутриблочного перемежителя."""

    SRANDOM = 'srandom'
    RECTANGULAR = 'rectangular'
    IDENTITY = 'identity'
    FILE = 'file'


@dataclass(frozen=True)
class InterleaverSpec:
    """Описание составного перемежителя: внутриблочная часть + параметры IBP."""

    ibp: IbpConfig
    intra: IntraKind = IntraKind.SRANDOM
    spread: int | None = None
    seed: int = 0
    rows: int | None = None
    intra_file: str | None = None
    ibp_aware: bool = True


@dataclass(frozen=True)
class TurboConfig:
    """Полное описание турбо-кода потока."""

    interleaver: InterleaverSpec
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    rate: Rate = Rate.THIRD
    variant: Variant = Variant.TAIL_PADDED
    iterations: int = 10
    decoder_mode: DecoderMode = field(default_factory=DecoderMode)

    @property
    def block_len(self) -> int:
        return self.interleaver.ibp.block_len

    @property
    def num_blocks(self) -> int:
        return self.interleaver.ibp.num_blocks

    @property
    def span(self) -> int:
        return self.interleaver.ibp.span

    def validate(self) -> None:
        """
        Проверяет согласованность конфигурации.

        :raises ConfigurationError: С именем параметра в ``field``.
        """
        self.generator.validate()
        self.interleaver.ibp.validate()
        if self.iterations < 1:
            raise ConfigurationError("Число итераций должно быть не меньше 1.", 'iters')
        self.decoder_mode.validate(self.generator.memory)


@dataclass(frozen=True)
class StreamCodeword:
    """
    Кодовое слово потока.

    Хвосты имеют форму ``(n_tails, m)``: B строк для TP, одна строка для C, ноль для TB.
    Маски ``parity*_mask`` отмечают передаваемые (невыколотые) проверочные биты.
    """

    systematic: np.ndarray
    parity1: np.ndarray
    parity2: np.ndarray
    tail1_systematic: np.ndarray
    tail1_parity: np.ndarray
    tail2_systematic: np.ndarray
    tail2_parity: np.ndarray
    parity1_mask: np.ndarray
    parity2_mask: np.ndarray

    @property
    def transmitted_bits(self) -> int:
        tails = (self.tail1_systematic.size + self.tail1_parity.size
                 + self.tail2_systematic.size + self.tail2_parity.size)
        return int(self.systematic.size + self.parity1_mask.sum() + self.parity2_mask.sum() + tails)


@dataclass(frozen=True)
class ChannelLlrs:
    """Канальные LLR с той же раскладкой, что и ``StreamCodeword``; выколотые позиции равны 0."""

    systematic: np.ndarray
    parity1: np.ndarray
    parity2: np.ndarray
    tail1_systematic: np.ndarray
    tail1_parity: np.ndarray
    tail2_systematic: np.ndarray
    tail2_parity: np.ndarray


@dataclass(frozen=True)
class IterationMessages:
    """Априорные входы и внешние выходы обеих компонент за одну итерацию, в естественном порядке."""

    apriori: tuple[np.ndarray, np.ndarray]
    extrinsic: tuple[np.ndarray, np.ndarray]


@dataclass
class DecodeDiagnostics:
    """
    Диагностика итеративного декодирования.

    Статистики внешней информации вычисляются по значениям, которыми обмениваются
    компоненты (после ограничения ±LLR_CLAMP); при известных битах значения
    предварительно умножаются на знак истинного бита.
    """

    extrinsic_mean: list[tuple[float, float]] = field(default_factory=list)
    extrinsic_variance: list[tuple[float, float]] = field(default_factory=list)
    ber: list[float] = field(default_factory=list)
    release_trace: list[int] = field(default_factory=list)
    messages: list[IterationMessages] = field(default_factory=list)


@dataclass(frozen=True)
class ReleaseSchedule:
    """Граница задержки конвейерного декодера: после I итераций блок b зависит от блоков b ± offset."""

    offset_blocks: int
    reach_per_iteration: list[int]


@dataclass(frozen=True)
class ConstituentResult:
    posterior: np.ndarray
    extrinsic: np.ndarray


class TurboCodec:
    """
    Кодер и итеративный декодер IBPTC для потока из B блоков по L бит.

    Классический турбо-код - частный случай S = 0.
    """

    def __init__(self, config: TurboConfig, trellis: Trellis, permutation: StreamPermutation):
        """
        Инициализирует кодек.

        :param config: Конфигурация кода.
        :param trellis: Решётка компонентного кода.
        :param permutation: Составная перестановка потока длины B·L.
        """
        config.validate()
        if permutation.size != config.block_len * config.num_blocks:
            raise ConfigurationError(
                f"Длина перестановки {permutation.size} не равна B·L = "
                f"{config.block_len * config.num_blocks}.", 'block_len'
            )
        if config.variant == Variant.TAIL_BITING:
            circular_state_table(config.block_len, trellis)
        self.config = config
        self.trellis = trellis
        self.permutation = permutation
        self.parity1_mask, self.parity2_mask = self._puncture_masks()

    @property
    def stream_len(self) -> int:
        return self.config.block_len * self.config.num_blocks

    @property
    def tail_rows(self) -> int:
        return {
            Variant.TAIL_PADDED: self.config.num_blocks,
            Variant.TAIL_BITING: 0,
            Variant.CONTINUOUS: 1,
        }[self.config.variant]

    @property
    def transmitted_bits(self) -> int:
        tails = 4 * self.tail_rows * self.trellis.memory
        return int(self.stream_len + self.parity1_mask.sum() + self.parity2_mask.sum() + tails)

    @property
    def effective_rate(self) -> float:
        """Отношение числа информационных бит к числу переданных (с хвостами и выкалыванием)."""
        return self.stream_len / self.transmitted_bits

    def _puncture_masks(self) -> tuple[np.ndarray, np.ndarray]:
        positions = np.arange(self.stream_len)
        if self.config.rate == Rate.HALF:
            # нечётные позиции сохраняют parity1, чётные - parity2
            return positions % 2 == 1, positions % 2 == 0
        keep = np.ones(self.stream_len, dtype=bool)
        return keep, keep.copy()

    def _encode_constituent(self, blocks: np.ndarray) -> EncodedBatch:
        variant = self.config.variant
        if variant == Variant.TAIL_PADDED:
            return encode_batch(blocks, self.trellis, terminate=True)
        if variant == Variant.TAIL_BITING:
            return encode_tailbiting_batch(blocks, self.trellis)
        return encode_batch(blocks.reshape(1, -1), self.trellis, terminate=True)

    def encode_stream(self, bits: np.ndarray) -> StreamCodeword:
        """
        Кодирует поток из B·L информационных бит.

        :param bits: Информационные биты потока.
        :return: Систематическая дорожка, две проверочные дорожки, хвосты и маски выкалывания.
        :raises LaneLengthError: Если длина не кратна L.
        :raises ConfigurationError: Если число блоков не совпадает с конфигурацией.
        """
        bits = np.asarray(bits, dtype=np.uint8)
        block_len, num_blocks = self.config.block_len, self.config.num_blocks
        if bits.ndim != 1 or bits.size % block_len:
            raise LaneLengthError(f"Длина потока {bits.size} не кратна длине блока L={block_len}.")
        if bits.size != self.stream_len:
            raise ConfigurationError(
                f"Поток из {bits.size // block_len} блоков, а кодек настроен на B={num_blocks}.",
                'num_blocks',
            )

        permuted = self.permutation.permutation.interleave(bits)
        first = self._encode_constituent(bits.reshape(num_blocks, block_len))
        second = self._encode_constituent(permuted.reshape(num_blocks, block_len))
        empty = np.zeros((0, self.trellis.memory), dtype=np.uint8)

        return StreamCodeword(
            systematic=bits.copy(),
            parity1=first.parity.ravel(),
            parity2=second.parity.ravel(),
            tail1_systematic=empty if first.tail_systematic is None else first.tail_systematic,
            tail1_parity=empty if first.tail_parity is None else first.tail_parity,
            tail2_systematic=empty if second.tail_systematic is None else second.tail_systematic,
            tail2_parity=empty if second.tail_parity is None else second.tail_parity,
            parity1_mask=self.parity1_mask,
            parity2_mask=self.parity2_mask,
        )

    def transmit(self, codeword: StreamCodeword, channel: ChannelConfig, trial: int) -> ChannelLlrs:
        """
        Передаёт кодовое слово через AWGN-канал и возвращает канальные LLR.

        Шум каждой дорожки берётся из собственного потока генератора (seed, trial, lane)
        на полную длину дорожки; выколотые позиции затем обнуляются.
        """
        variance = channel.noise_variance

        def lane_llr(bits: np.ndarray, lane: Lane) -> np.ndarray:
            received = transmit(modulate(bits), channel, trial_rng(channel.seed, trial, lane))
            return to_llr(received, variance)

        return ChannelLlrs(
            systematic=lane_llr(codeword.systematic, Lane.SYSTEMATIC),
            parity1=np.where(codeword.parity1_mask, lane_llr(codeword.parity1, Lane.PARITY1), 0.0),
            parity2=np.where(codeword.parity2_mask, lane_llr(codeword.parity2, Lane.PARITY2), 0.0),
            tail1_systematic=lane_llr(codeword.tail1_systematic, Lane.TAIL1_SYSTEMATIC),
            tail1_parity=lane_llr(codeword.tail1_parity, Lane.TAIL1_PARITY),
            tail2_systematic=lane_llr(codeword.tail2_systematic, Lane.TAIL2_SYSTEMATIC),
            tail2_parity=lane_llr(codeword.tail2_parity, Lane.TAIL2_PARITY),
        )

    def noiseless_llrs(self, codeword: StreamCodeword, magnitude: float | None = None) -> ChannelLlrs:
        """LLR бесшумного канала: ±magnitude (по умолчанию ±LLR_CLAMP), выколотые позиции равны 0."""
        magnitude = settings.LLR_CLAMP if magnitude is None else magnitude
        return ChannelLlrs(
            systematic=magnitude * modulate(codeword.systematic),
            parity1=np.where(codeword.parity1_mask, magnitude * modulate(codeword.parity1), 0.0),
            parity2=np.where(codeword.parity2_mask, magnitude * modulate(codeword.parity2), 0.0),
            tail1_systematic=magnitude * modulate(codeword.tail1_systematic),
            tail1_parity=magnitude * modulate(codeword.tail1_parity),
            tail2_systematic=magnitude * modulate(codeword.tail2_systematic),
            tail2_parity=magnitude * modulate(codeword.tail2_parity),
        )

    def _check_lanes(self, llrs: ChannelLlrs) -> None:
        expected_tail = (self.tail_rows, self.trellis.memory)
        for name in ('systematic', 'parity1', 'parity2'):
            if np.shape(getattr(llrs, name)) != (self.stream_len,):
                raise LaneLengthError(
                    f"Дорожка {name}: ожидалась длина {self.stream_len}, "
                    f"получено {np.shape(getattr(llrs, name))}."
                )
        for name in ('tail1_systematic', 'tail1_parity', 'tail2_systematic', 'tail2_parity'):
            if np.shape(getattr(llrs, name)) != expected_tail:
                raise LaneLengthError(
                    f"Дорожка {name}: ожидалась форма {expected_tail}, "
                    f"получено {np.shape(getattr(llrs, name))}."
                )

    def constituent_decode(
            self,
            systematic: np.ndarray,
            parity: np.ndarray,
            apriori: np.ndarray,
            tail_systematic: np.ndarray,
            tail_parity: np.ndarray,
    ) -> ConstituentResult:
        """
        Декодирует одну компоненту по всему потоку в её собственном порядке бит.

        TP - полный BCJR каждого блока с известными нулевыми границами; TB - BCJR
        каждого блока с циклическими границами, оценёнными одним прогревочным кругом;
        C - BCJR со скользящим окном по всему потоку как по одной последовательности.
        Блоки TP и TB декодируются одной пачкой.

        :return: Апостериорные и внешние LLR информационных бит длины B·L.
        """
        config = self.config
        block_len, num_blocks = config.block_len, config.num_blocks
        mode = config.decoder_mode
        variant = config.variant

        if variant == Variant.TAIL_BITING:
            siso_input = SisoInput(
                llr_systematic=systematic.reshape(num_blocks, block_len),
                llr_parity=parity.reshape(num_blocks, block_len),
                llr_apriori=apriori.reshape(num_blocks, block_len),
                start=siso.Boundary.PROVIDED,
                end=siso.Boundary.PROVIDED,
            )
            siso_input.alpha_start, siso_input.beta_end = siso.circular_boundaries(
                siso_input, self.trellis, mode
            )
            output = siso.decode(siso_input, self.trellis, mode)
            return ConstituentResult(output.llr_posterior.ravel(), output.llr_extrinsic.ravel())

        if variant == Variant.TAIL_PADDED:
            shape = (num_blocks, block_len)
            rows = num_blocks
        else:
            shape = (1, num_blocks * block_len)
            rows = 1
            if mode.window is None:
                mode = DecoderMode.default_window(mode.algorithm)

        tail_apriori = np.zeros((rows, self.trellis.memory))
        siso_input = SisoInput(
            llr_systematic=np.hstack([systematic.reshape(shape), tail_systematic]),
            llr_parity=np.hstack([parity.reshape(shape), tail_parity]),
            llr_apriori=np.hstack([apriori.reshape(shape), tail_apriori]),
        )
        if variant == Variant.TAIL_PADDED:
            output = siso.app_decode(siso_input, self.trellis, mode)
        else:
            output = siso.decode(siso_input, self.trellis, mode)

        info = shape[1]
        return ConstituentResult(
            output.llr_posterior[:, :info].ravel(), output.llr_extrinsic[:, :info].ravel()
        )

    def decode_stream(
            self,
            llrs: ChannelLlrs,
            truth: np.ndarray | None = None,
            record_messages: bool = False,
    ) -> tuple[np.ndarray, DecodeDiagnostics]:
        """
        Итеративно декодирует поток.

        На каждой итерации: первая компонента декодирует все блоки в естественном
        порядке (априорная информация - обратно переставленная внешняя информация
        второй), внешняя информация переставляется составной перестановкой, вторая
        компонента декодирует все переставленные блоки, результат переставляется
        обратно. Итоговое решение - знак апостериорного LLR второй компоненты
        (ноль решается в пользу бита 0).

        :param llrs: Канальные LLR.
        :param truth: Истинные информационные биты для покомпонентной диагностики и BER.
        :param record_messages: Сохранять ли массивы априорной и внешней информации по итерациям.
        :return: Решения по B·L информационным битам и диагностика.
        :raises LaneLengthError: При несогласованных длинах дорожек.
        """
        self._check_lanes(llrs)
        clamp = settings.LLR_CLAMP
        perm = self.permutation.permutation
        sign = None if truth is None else modulate(truth)

        systematic2 = perm.interleave(np.asarray(llrs.systematic, dtype=np.float64))
        apriori1 = np.zeros(self.stream_len)
        diagnostics = DecodeDiagnostics()
        history = []

        for iteration in range(1, self.config.iterations + 1):
            first = self.constituent_decode(
                llrs.systematic, llrs.parity1, apriori1, llrs.tail1_systematic, llrs.tail1_parity
            )
            extrinsic1 = np.clip(first.extrinsic, -clamp, clamp)
            apriori2 = perm.interleave(extrinsic1)

            second = self.constituent_decode(
                systematic2, llrs.parity2, apriori2, llrs.tail2_systematic, llrs.tail2_parity
            )
            extrinsic2 = perm.deinterleave(np.clip(second.extrinsic, -clamp, clamp))
            decisions = hard_decision(perm.deinterleave(second.posterior))
            history.append(decisions)

            first_lane, second_lane = (
                (extrinsic1, extrinsic2) if sign is None else (sign * extrinsic1, sign * extrinsic2)
            )
            diagnostics.extrinsic_mean.append((float(np.mean(first_lane)), float(np.mean(second_lane))))
            diagnostics.extrinsic_variance.append(
                (float(np.var(first_lane)), float(np.var(second_lane)))
            )
            if truth is not None:
                diagnostics.ber.append(float(np.mean(decisions != truth)))
            if record_messages:
                diagnostics.messages.append(IterationMessages(
                    apriori=(apriori1, perm.deinterleave(apriori2)),
                    extrinsic=(extrinsic1, extrinsic2),
                ))
            logger.debug(
                f"Iteration {iteration}: extrinsic mean={diagnostics.extrinsic_mean[-1]}, "
                f"ber={diagnostics.ber[-1] if diagnostics.ber else 'n/a'}"
            )
            apriori1 = extrinsic2

        diagnostics.release_trace = self._release_trace(history)
        return history[-1], diagnostics

    def _release_trace(self, history: list[np.ndarray]) -> list[int]:
        """Для каждого блока - первая итерация, после которой его решения больше не менялись."""
        final = history[-1].reshape(self.config.num_blocks, -1)
        released = np.ones(self.config.num_blocks, dtype=np.int64)
        for iteration, decisions in enumerate(history[:-1], start=1):
            changed = np.any(decisions.reshape(final.shape) != final, axis=1)
            released[changed] = iteration + 1
        return released.tolist()


def release_schedule(cfg: TurboConfig) -> ReleaseSchedule:
    """
    Граница распространения сообщений для конвейерного декодера.

    Каждая полуитерация расширяет зависимость на S блоков, поэтому после I итераций
    выход блока b зависит только от канальных LLR блоков b ± 2·S·I.
    """
    span = cfg.span
    return ReleaseSchedule(
        offset_blocks=2 * span * cfg.iterations,
        reach_per_iteration=[2 * span * iteration for iteration in range(1, cfg.iterations + 1)],
    )
