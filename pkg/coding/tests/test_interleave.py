import numpy as np
import pytest

from coding.exceptions import (
    ConfigurationError,
    ConstructionError,
    PermutationError,
    UnrepairableBoundaryError,
)
from coding.services.interleave import (
    IbpConfig,
    IbpRule,
    Permutation,
    check_span,
    check_spread,
    compose_stream,
    default_spread,
    is_bijection,
    latency_report,
    make_ibp,
    make_rectangular,
    make_srandom,
)


class TestPermutation:
    def test_rejects_non_bijection(self):
        with pytest.raises(PermutationError):
            Permutation.from_mapping([0, 2, 2])

    def test_interleave_then_deinterleave(self, rng):
        perm = Permutation.from_mapping(rng.permutation(50))
        values = rng.normal(size=50)
        np.testing.assert_array_equal(perm.deinterleave(perm.interleave(values)), values)

    def test_interleave_moves_element_to_mapping(self):
        perm = Permutation.from_mapping([2, 0, 1])
        np.testing.assert_array_equal(perm.interleave(np.array([10, 20, 30])), [20, 30, 10])

    def test_composition(self, rng):
        first = Permutation.from_mapping(rng.permutation(30))
        second = Permutation.from_mapping(rng.permutation(30))
        values = rng.normal(size=30)
        composed = first.then(second)
        expected = second.interleave(first.interleave(values))
        np.testing.assert_array_equal(composed.interleave(values), expected)

    def test_mapping_is_read_only(self):
        perm = Permutation.identity(4)
        with pytest.raises(ValueError):
            perm.mapping[0] = 1


class TestSRandom:
    def test_deterministic_and_spread(self):
        first = make_srandom(200, 8, seed=7)
        second = make_srandom(200, 8, seed=7)
        np.testing.assert_array_equal(first.mapping, second.mapping)
        assert is_bijection(first.mapping)
        assert check_spread(first.mapping, 8)

    def test_different_seeds_differ(self):
        first, second = make_srandom(100, 5, seed=1), make_srandom(100, 5, seed=2)
        assert not np.array_equal(first.mapping, second.mapping)

    def test_default_spread(self):
        assert default_spread(40) == 3
        assert default_spread(1024) == 21
        assert default_spread(2) == 1

    def test_impossible_spread_raises(self):
        with pytest.raises(ConstructionError) as exc_info:
            make_srandom(40, 20, seed=0, max_restarts=5)
        assert exc_info.value.restarts == 5

    @pytest.mark.parametrize('spread', [0, 21])
    def test_spread_out_of_range(self, spread):
        with pytest.raises(ConfigurationError) as exc_info:
            make_srandom(40, spread, seed=0)
        assert exc_info.value.field == 'spread'

    def test_ibp_aware_keeps_spread_across_block_boundary(self):
        """Модифицированный критерий: разнесение сохраняется и на стыке соседних блоков потока."""
        spread = 4
        cfg = IbpConfig(block_len=64, span=1, num_blocks=8)
        intra = make_srandom(64, spread, seed=3, ibp=make_ibp(cfg))
        assert check_spread(intra.mapping, spread)

        mapping = compose_stream(intra, cfg).permutation.mapping.astype(int)
        for block in range(1, cfg.num_blocks - 2):
            boundary = (block + 1) * cfg.block_len
            for left in range(boundary - spread + 1, boundary):
                for right in range(boundary, left + spread):
                    assert abs(mapping[right] - mapping[left]) >= spread


class TestRectangular:
    def test_row_write_column_read(self):
        perm = make_rectangular(4, 5)
        # (строка 0, столбец 1) читается четвёртым
        assert perm.mapping[1] == 4
        assert perm.mapping[5] == 1
        assert is_bijection(perm.mapping)

    def test_size_mismatch(self):
        with pytest.raises(ConfigurationError):
            make_rectangular(4, 5, block_len=21)


class TestIbp:
    def test_rule_table(self):
        rule = IbpRule(span=1, period=3)
        np.testing.assert_array_equal(rule.table(7), [-1, 0, 1, -1, 0, 1, -1])

    def test_rule_with_step(self):
        rule = IbpRule(span=2, period=5, step=2)
        np.testing.assert_array_equal(rule.table(5), [-2, 0, 2, -1, 1])

    def test_default_period(self):
        assert IbpConfig(block_len=10, span=2, num_blocks=5).resolved_period == 5

    @pytest.mark.parametrize(
        'cfg, field',
        [
            (IbpConfig(block_len=0, span=1, num_blocks=3), 'block_len'),
            (IbpConfig(block_len=10, span=-1, num_blocks=3), 'span'),
            (IbpConfig(block_len=10, span=1, num_blocks=3, period=0), 'period'),
            (IbpConfig(block_len=10, span=2, num_blocks=4), 'num_blocks'),
            (IbpConfig(block_len=10, span=1, num_blocks=3, step=3), 'step'),
        ],
    )
    def test_invalid_config(self, cfg, field):
        with pytest.raises(ConfigurationError) as exc_info:
            cfg.validate()
        assert exc_info.value.field == field


class TestComposeStream:
    def test_zero_span_is_block_diagonal(self):
        cfg = IbpConfig(block_len=40, span=0, num_blocks=5)
        intra = make_srandom(40, 3, seed=1)
        stream = compose_stream(intra, cfg)
        mapping = stream.permutation.mapping
        np.testing.assert_array_equal(mapping // 40, np.arange(200) // 40)
        for block in range(5):
            local = mapping[block * 40:(block + 1) * 40] - block * 40
            np.testing.assert_array_equal(local, intra.mapping)

    def test_wrap_respects_span(self):
        cfg = IbpConfig(block_len=30, span=2, num_blocks=7)
        stream = compose_stream(make_srandom(30, 3, seed=4), cfg)
        assert is_bijection(stream.permutation.mapping)
        assert check_span(stream)
        assert np.abs(stream.block_displacement()).max() == 2

    def test_block_column_follows_intra(self):
        """Бит (b, i) попадает в позицию intra[i] блока b + δ(intra[i])."""
        cfg = IbpConfig(block_len=6, span=1, num_blocks=3)
        intra = Permutation.from_mapping([3, 0, 4, 1, 5, 2])
        stream = compose_stream(intra, cfg)
        # бит (1, 0): j = 3, δ(3) = -1, блок 0
        assert stream.permutation.mapping[6] == 3
        # бит (0, 2): j = 4, δ(4) = 0
        assert stream.permutation.mapping[2] == 4
        # бит (2, 4): j = 5, δ(5) = +1, блок 3 → 0 по модулю
        assert stream.permutation.mapping[16] == 5

    def test_clamp_repairs_edges(self):
        cfg = IbpConfig(block_len=6, span=1, num_blocks=4, boundary_mode='clamp')
        stream = compose_stream(Permutation.identity(6), cfg)
        assert stream.repairs == 4
        assert is_bijection(stream.permutation.mapping)
        assert check_span(stream)

    def test_clamp_allows_few_blocks(self):
        cfg = IbpConfig(block_len=6, span=1, num_blocks=2, boundary_mode='clamp')
        stream = compose_stream(Permutation.identity(6), cfg)
        assert check_span(stream)

    def test_clamp_unrepairable(self):
        """Несимметричное распределение смещений не даёт попарного обмена на краю."""
        cfg = IbpConfig(block_len=4, span=1, num_blocks=4, boundary_mode='clamp')
        with pytest.raises(UnrepairableBoundaryError):
            compose_stream(Permutation.identity(4), cfg)

    def test_intra_length_mismatch(self):
        cfg = IbpConfig(block_len=10, span=1, num_blocks=3)
        with pytest.raises(ConfigurationError):
            compose_stream(Permutation.identity(9), cfg)


class TestLatency:
    @pytest.mark.parametrize(
        'span, expected',
        [(0, 1024), (1, 2048), (2, 3072)],
    )
    def test_latency(self, span, expected):
        report = latency_report(IbpConfig(block_len=1024, span=span, num_blocks=2 * span + 1))
        assert report.srid_bits == expected
        assert report.avg_latency_bits == expected
        assert report.classic_equivalent_block == expected


def random_stream_configs(rng, count):
    """Случайные конфигурации (L, S, T_s, B) режима wrap."""
    for _ in range(count):
        span = int(rng.integers(0, 4))
        yield IbpConfig(
            block_len=int(rng.integers(1, 49)),
            span=span,
            num_blocks=int(rng.integers(2 * span + 1, 2 * span + 8)),
            period=int(rng.integers(1, 12)),
        )


def assert_stream_properties(cfg, rng):
    stream = compose_stream(Permutation.from_mapping(rng.permutation(cfg.block_len)), cfg)
    assert is_bijection(stream.permutation.mapping)
    assert check_span(stream)

    delta = make_ibp(cfg).table(cfg.block_len)
    assert np.all(np.abs(delta) <= cfg.span)
    overlap = max(0, cfg.block_len - cfg.period)
    np.testing.assert_array_equal(delta[cfg.period:], delta[:overlap])


class TestStreamProperties:
    @pytest.mark.parametrize(
        'span, period, step', [(1, 3, 1), (1, 4, 1), (2, 5, 2), (3, 5, 1), (3, 7, 1)]
    )
    def test_displacement_is_periodic(self, span, period, step):
        delta = IbpRule(span=span, period=period, step=step).table(60)
        np.testing.assert_array_equal(delta[period:], delta[:60 - period])

    def test_random_grid(self):
        rng = np.random.default_rng(300)
        for cfg in random_stream_configs(rng, 300):
            assert_stream_properties(cfg, rng)

    @pytest.mark.slow
    def test_large_random_grid(self):
        rng = np.random.default_rng(10_000)
        for cfg in random_stream_configs(rng, 10_000):
            assert_stream_properties(cfg, rng)

    @pytest.mark.slow
    def test_srandom_spread_on_random_lengths(self):
        rng = np.random.default_rng(55)
        for _ in range(50):
            block_len = int(rng.integers(16, 257))
            spread = default_spread(block_len)
            perm = make_srandom(block_len, spread, seed=int(rng.integers(0, 2**31)))
            assert is_bijection(perm.mapping)
            assert check_spread(perm.mapping, spread)
