"""Сборка перемежителей и кодека по описанию конфигурации."""
import logging
from pathlib import Path

from coding.exceptions import ConfigurationError
from coding.services.interleave import (
    Permutation,
    StreamPermutation,
    compose_stream,
    default_spread,
    make_ibp,
    make_rectangular,
    make_srandom,
)
from coding.services.rsc_codec import build_trellis
from coding.services.turbo import InterleaverSpec, IntraKind, TurboCodec, TurboConfig
from coding.utils.permutation_io import read_permutation

logger = logging.getLogger(__name__)


def build_intra(spec: InterleaverSpec) -> Permutation:
    """
    Строит внутриблочный перемежитель выбранного типа.

    :raises ConfigurationError: Если параметры типа не заданы или не согласуются с L.
    :raises ConstructionError: Если s-random построение не удалось.
    :raises PermutationFileError: Если файл перестановки некорректен.
    """
    block_len = spec.ibp.block_len

    if spec.intra == IntraKind.SRANDOM:
        spread = spec.spread if spec.spread is not None else default_spread(block_len)
        rule = make_ibp(spec.ibp) if spec.ibp_aware and spec.ibp.span > 0 else None
        return make_srandom(block_len, spread, spec.seed, ibp=rule)

    if spec.intra == IntraKind.RECTANGULAR:
        if spec.rows is None or spec.rows < 1 or block_len % spec.rows:
            raise ConfigurationError(
                f"Для прямоугольного перемежителя нужно число строк, делящее L={block_len}.", 'rows'
            )
        return make_rectangular(spec.rows, block_len // spec.rows, block_len)

    if spec.intra == IntraKind.FILE:
        if not spec.intra_file:
            raise ConfigurationError("Не указан файл внутриблочной перестановки.", 'intra_file')
        intra = read_permutation(Path(spec.intra_file))
        if intra.size != block_len:
            raise ConfigurationError(
                f"Перестановка из файла имеет длину {intra.size}, а L={block_len}.", 'intra_file'
            )
        return intra

    return Permutation.identity(block_len)


def build_stream_permutation(spec: InterleaverSpec) -> StreamPermutation:
    """Строит составную перестановку потока: внутриблочная часть, затем IBP."""
    return compose_stream(build_intra(spec), spec.ibp)


def create_turbo_codec(config: TurboConfig) -> TurboCodec:
    """
    Создаёт кодек по конфигурации.

    :raises ConfigurationError: При некорректной конфигурации.
    """
    config.validate()
    permutation = build_stream_permutation(config.interleaver)
    codec = TurboCodec(config, build_trellis(config.generator), permutation)
    logger.info(
        f"Turbo codec created: variant={config.variant}, rate={config.rate}, L={config.block_len}, "
        f"B={config.num_blocks}, S={config.span}, I={config.iterations}, "
        f"effective rate={codec.effective_rate:.4f}"
    )
    return codec
