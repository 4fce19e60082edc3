import pytest

from experiments.exceptions import ResultWriteError
from experiments.utils.csv_output import BER_COLUMNS, format_value, write_csv
from experiments.utils.grid import parse_grid


class TestParseGrid:
    def test_inclusive_sweep(self):
        assert parse_grid('0.0:0.5:2.0') == [0.0, 0.5, 1.0, 1.5, 2.0]

    def test_decimal_steps_are_exact(self):
        grid = parse_grid('0.0:0.1:0.9')
        assert len(grid) == 10
        assert grid[-1] == 0.9
        assert grid[3] == 0.3

    def test_stop_off_grid(self):
        assert parse_grid('0:0.3:1') == [0.0, 0.3, 0.6, 0.9]

    def test_single_value(self):
        assert parse_grid(' 1.5 ') == [1.5]

    def test_negative_start(self):
        assert parse_grid('-1:0.5:0') == [-1.0, -0.5, 0.0]

    @pytest.mark.parametrize('text', ['a:b:c', '0:0:1', '2:0.5:1', '1:2', '', 'inf', '0:nan:1'])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            parse_grid(text)


class TestCsvOutput:
    def test_format_value(self):
        assert format_value(0.0) == '0'
        assert format_value(1e-5) == '1e-05'
        assert format_value(0.123456789) == '0.123457'
        assert format_value(42) == '42'
        assert format_value(True) == '1'
        assert format_value('0.000') == '0.000'

    def test_write_csv(self, tmp_path):
        path = tmp_path / 'nested' / 'ber.csv'
        rows = write_csv(path, BER_COLUMNS, [(0.5, 240, 3, 0.0125, 6, 2, 1 / 3, 1.5, '0.000', True)])
        assert rows == 1
        assert path.read_text(encoding='utf-8').splitlines() == [
            'ebn0_db,bits,bit_errors,ber,frames,frame_errors,fer,mean_iters,seconds,under_sampled',
            '0.5,240,3,0.0125,6,2,0.333333,1.5,0.000,1',
        ]

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(ResultWriteError):
            write_csv(tmp_path, BER_COLUMNS, [])
