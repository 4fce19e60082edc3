import json
import tempfile
from io import StringIO
from pathlib import Path

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError
from freezegun import freeze_time
from test_plus.test import TestCase

from coding.services.interleave import Permutation, check_spread
from coding.utils.permutation_io import format_permutation, read_permutation
from experiments.models import ExperimentCommand, ExperimentRun
from experiments.tests.base import BaseIntegrationTestCase
from experiments.utils.csv_output import BER_COLUMNS, EXIT_COLUMNS, TRACE_COLUMNS

SMALL_CODE = {'block_len': 40, 'span': 1, 'num_blocks': 3, 'iters': 2, 'seed': 7}


def run(command, **options):
    """Запускает команду и возвращает её вывод."""
    stdout = StringIO()
    call_command(command, stdout=stdout, **options)
    return stdout.getvalue()


def read_rows(path):
    return path.read_text(encoding='utf-8').splitlines()


@pytest.mark.django_db
class TestBerCommand(TestCase):
    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.results = Path(directory.name)

    @freeze_time("2025-03-01 12:00:00")
    def test_writes_csv_and_manifest(self):
        """Тест: одна строка на точку сетки, заголовок и манифест рядом с CSV."""
        output = self.results / 'ber.csv'
        with self.settings(IBPTC_THREADS=1):
            stdout = run('ber', ebn0='0.0:1.0:2.0', blocks=6, output=output, **SMALL_CODE)

        rows = read_rows(output)
        self.assertEqual(rows[0], ','.join(BER_COLUMNS))
        self.assertEqual(len(rows), 4)
        self.assertEqual([row.split(',')[8] for row in rows[1:]], ['0.000'] * 3)
        # 240 бит на точку не набирают 100 ошибок
        self.assertEqual([row.split(',')[9] for row in rows[1:]], ['1'] * 3)
        self.assertEqual([row.split(',')[4] for row in rows[1:]], ['6', '6', '6'])
        self.assertIn('3 строк', stdout)

        manifest_path = self.results / 'ber.csv.manifest.json'
        manifest = json.loads(manifest_path.read_text(encoding='utf-8'))
        self.assertEqual(manifest['command'], 'ber')
        self.assertEqual(manifest['seed'], 7)
        self.assertEqual(manifest['config']['num_blocks'], 3)
        self.assertEqual(manifest['config']['spread'], 3)
        self.assertEqual(manifest['config']['ebn0'], '0.0:1.0:2.0')
        self.assertEqual(manifest['started_at'], '2025-03-01T12:00:00Z')
        self.assertEqual(manifest['finished_at'], '2025-03-01T12:00:00Z')
        self.assertEqual(len(manifest['timings']['points']), 3)

        run_record = ExperimentRun.objects.for_result(output)
        self.assertIsNotNone(run_record)
        self.assertEqual(run_record.command, ExperimentCommand.BER)
        self.assertEqual(run_record.rows, 3)
        self.assertEqual(run_record.duration_seconds, 0.0)

    def test_manifest_replay_is_byte_identical(self):
        """Тест: повтор по манифесту при другом числе потоков даёт тот же CSV."""
        first = self.results / 'first.csv'
        with self.settings(IBPTC_THREADS=1):
            run('ber', ebn0='-1.0:1.0:1.0', blocks=12, min_errors=20, output=first, **SMALL_CODE)

        replay = self.results / 'replay.csv'
        with self.settings(IBPTC_THREADS=3):
            run('ber', manifest=self.results / 'first.csv.manifest.json', output=replay)

        self.assertEqual(first.read_bytes(), replay.read_bytes())
        self.assertEqual(ExperimentRun.objects.count(), 2)

    def test_default_output_path(self):
        with self.settings(IBPTC_RESULTS_DIR=self.results):
            run('ber', ebn0='0', blocks=3, **SMALL_CODE)
        self.assertTrue((self.results / 'ber-seed7.csv').exists())
        self.assertTrue((self.results / 'ber-seed7.csv.manifest.json').exists())

    def test_timing_flag(self):
        output = self.results / 'timed.csv'
        run('ber', ebn0='0', blocks=3, timing=True, output=output, **SMALL_CODE)
        self.assertEqual(ExperimentRun.objects.get().config['timing'], True)

    def test_classic_code(self):
        """Тест: --span 0 - классический турбо-код из одного блока."""
        output = self.results / 'classic.csv'
        run('ber', block_len=40, span=0, iters=2, ebn0='0', blocks=2, output=output)
        self.assertEqual(read_rows(output)[1].split(',')[4], '2')


@pytest.mark.django_db
class TestCommandErrors(TestCase):
    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.results = Path(directory.name)

    def assertUsageError(self, prefix, command='ber', **options):
        with self.assertRaises(CommandError) as context:
            run(command, **options)
        self.assertEqual(context.exception.returncode, 2)
        message = str(context.exception)
        self.assertTrue(message.startswith(prefix), message)
        self.assertNotIn('\n', message)
        return message

    def test_span_requires_enough_blocks(self):
        self.assertUsageError('--num-blocks: ', block_len=40, span=1, num_blocks=2, ebn0='0')

    def test_bad_grid(self):
        self.assertUsageError('--ebn0: ', block_len=40, ebn0='0:-1:2')

    def test_tail_biting_period_multiple(self):
        self.assertUsageError(
            '--block-len: ',
            block_len=42, span=0, variant='TB', ebn0='0', output=self.results / 'tb.csv',
        )

    def test_missing_manifest(self):
        self.assertUsageError('--manifest: ', manifest=self.results / 'absent.json')

    def test_manifest_of_another_command(self):
        output = self.results / 'evolve.csv'
        run('evolve', ebn0=0.5, trials=1, output=output, **SMALL_CODE)
        self.assertUsageError('--manifest: ', manifest=self.results / 'evolve.csv.manifest.json')

    def test_srandom_spread_too_large(self):
        with self.settings(SRANDOM_MAX_RESTARTS=5):
            self.assertUsageError(
                '--spread: ', block_len=40, spread=20, ebn0='0', output=self.results / 'spread.csv'
            )

    def test_no_run_recorded_on_error(self):
        with self.assertRaises(CommandError):
            run('ber', block_len=40, span=1, num_blocks=2, ebn0='0')
        self.assertEqual(ExperimentRun.objects.count(), 0)


class TestExperimentCommands(BaseIntegrationTestCase):
    def test_exit_chart_rows(self, tmp_path):
        """Сетка ia 0.0:0.1:0.9 даёт 10 строк на компоненту."""
        output = tmp_path / 'exit.csv'
        run('exit', ebn0=1.0, samples=120, output=output, **SMALL_CODE)
        rows = read_rows(output)
        assert rows[0] == ','.join(EXIT_COLUMNS)
        constituents = [row.split(',')[3] for row in rows[1:]]
        assert constituents == ['1'] * 10 + ['2'] * 10

    def test_exit_trajectory(self, tmp_path):
        output = tmp_path / 'trajectory.csv'
        run('exit', ebn0=1.0, trajectory=True, trials=1, output=output, **SMALL_CODE)
        assert len(read_rows(output)) == 1 + 2 * SMALL_CODE['iters']

    def test_evolve_one_row_per_iteration(self, tmp_path):
        output = tmp_path / 'evolve.csv'
        run('evolve', ebn0=0.5, trials=1, output=output, **{**SMALL_CODE, 'iters': 10})
        rows = read_rows(output)
        assert rows[0] == ','.join(TRACE_COLUMNS)
        assert [row.split(',')[0] for row in rows[1:]] == [str(i) for i in range(1, 11)]

    def test_cov_both_constituents(self, tmp_path):
        output = tmp_path / 'cov.csv'
        run('cov', ebn0=0.5, trials=1, constituent='both', output=output, **SMALL_CODE)
        rows = read_rows(output)
        assert len(rows) == 1 + 2 * SMALL_CODE['iters']
        # первая полуитерация: априорный вход нулевой
        assert rows[1] == '1,0,1'


class TestInterleaverCommand(BaseIntegrationTestCase):
    def test_generate_then_validate(self, tmp_path):
        output = tmp_path / 'srandom.txt'
        run('interleaver', action='generate', block_len=64, spread=5, seed=1, output=output)

        permutation = read_permutation(output)
        assert permutation.size == 64
        assert check_spread(permutation.mapping, 5)
        assert (tmp_path / 'srandom.txt.manifest.json').exists()

        report = run('interleaver', action='validate', input=str(output), spread=5)
        assert 'bijective: pass' in report
        assert 'spread s=5: pass' in report

    def test_validate_duplicate_index(self, tmp_path):
        path = tmp_path / 'broken.txt'
        path.write_text("3\n0 1\n0 2\n2 0\n", encoding='utf-8')
        with pytest.raises(CommandError) as exc_info:
            run('interleaver', action='validate', input=str(path))
        assert exc_info.value.returncode == 2
        assert str(exc_info.value).startswith('строка 3: ')

    def test_validate_reports_failed_spread(self, tmp_path):
        path = tmp_path / 'identity.txt'
        path.write_text(format_permutation(Permutation.identity(16)), encoding='utf-8')
        stdout = StringIO()
        with pytest.raises(CommandError) as exc_info:
            call_command('interleaver', action='validate', input=str(path), spread=2, stdout=stdout)
        assert exc_info.value.returncode == 1
        assert 'spread s=2: fail' in stdout.getvalue()

    def test_validate_span(self, tmp_path):
        output = tmp_path / 'stream.txt'
        run('interleaver', action='compose', block_len=16, span=1, num_blocks=5, seed=3, output=output)
        report = run(
            'interleaver', action='validate', input=str(output), block_len=16, span=1, spread=1
        )
        assert 'span S=1: pass' in report

    def test_compose_identity(self, tmp_path):
        """S = 0 и тождественная внутриблочная перестановка дают тождественный файл."""
        output = tmp_path / 'identity.txt'
        stdout = run(
            'interleaver', action='compose', block_len=8, span=0, num_blocks=3,
            intra='identity', output=output,
        )
        assert output.read_text(encoding='utf-8') == format_permutation(Permutation.identity(24))
        assert 'SRID = 8' in stdout

    def test_missing_file(self, tmp_path):
        with pytest.raises(CommandError) as exc_info:
            run('interleaver', action='validate', input=str(tmp_path / 'absent.txt'))
        assert exc_info.value.returncode == 2

    def test_validate_invalid_utf8(self, tmp_path):
        """Байты вне UTF-8 - ошибка формата файла с номером строки, код 2."""
        path = tmp_path / 'binary.txt'
        path.write_bytes(b"2\n0 1\n1 \xff0\n")
        with pytest.raises(CommandError) as exc_info:
            run('interleaver', action='validate', input=str(path))
        assert exc_info.value.returncode == 2
        assert str(exc_info.value).startswith('строка 3: ')

    def test_validate_stream_without_spread(self, tmp_path):
        """Без --spread проверка разнесения не выполняется и корректный поток проходит."""
        output = tmp_path / 'stream.txt'
        run(
            'interleaver', action='compose', block_len=64, span=1, num_blocks=4,
            intra='rectangular', rows=8, output=output,
        )
        report = run('interleaver', action='validate', input=str(output), block_len=64, span=1)
        assert 'span S=1: pass' in report
        assert 'spread' not in report
