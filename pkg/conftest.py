import numpy as np
import pytest

from coding.services.factories import create_turbo_codec
from coding.services.interleave import IbpConfig
from coding.services.rsc_codec import build_trellis
from coding.services.siso import Algorithm, DecoderMode, WindowConfig
from coding.services.turbo import InterleaverSpec, IntraKind, Rate, TurboConfig, Variant


@pytest.fixture(scope='session')
def trellis():
    """Решётка кода 3GPP (память 3, 8 состояний)."""
    return build_trellis()


@pytest.fixture
def rng():
    """Генератор с фиксированным зерном для тестовых данных."""
    return np.random.default_rng(20240611)


@pytest.fixture
def make_codec():
    """
    Фабрика небольших кодеков для тестов.

    По умолчанию: L=40, S=1, B=6, TP, скорость 1/3, 4 итерации, s-random перемежитель.
    """

    def factory(
            block_len=40,
            span=1,
            num_blocks=6,
            variant=Variant.TAIL_PADDED,
            rate=Rate.THIRD,
            iterations=4,
            intra=IntraKind.SRANDOM,
            spread=None,
            algorithm=Algorithm.LOG_MAP,
            window=None,
            boundary_mode='wrap',
            seed=1,
    ):
        ibp = IbpConfig(
            block_len=block_len, span=span, num_blocks=num_blocks, boundary_mode=boundary_mode
        )
        config = TurboConfig(
            interleaver=InterleaverSpec(ibp=ibp, intra=intra, spread=spread, seed=seed),
            rate=Rate(rate),
            variant=Variant(variant),
            iterations=iterations,
            decoder_mode=DecoderMode(
                algorithm=algorithm,
                window=None if window is None else WindowConfig(*window),
            ),
        )
        return create_turbo_codec(config)

    return factory


@pytest.fixture
def results_dir(tmp_path, settings):
    """Каталог результатов экспериментов во временной папке."""
    settings.IBPTC_RESULTS_DIR = tmp_path
    return tmp_path
