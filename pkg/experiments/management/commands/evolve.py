import time
from pathlib import Path

from coding.services.factories import create_turbo_codec
from experiments.forms import TraceForm
from experiments.management.base import ExperimentBaseCommand, RunOutcome
from experiments.models import ExperimentCommand
from experiments.services.analysis import ExperimentRunner
from experiments.utils.csv_output import TRACE_COLUMNS, write_csv


class Command(ExperimentBaseCommand):
    help = "Эволюция SNR внешней информации по итерациям при заданном Eb/N0."

    command_name = ExperimentCommand.EVOLVE.value
    form_class = TraceForm

    def run(self, form: TraceForm, output: Path) -> RunOutcome:
        data = form.cleaned_data
        runner = ExperimentRunner(create_turbo_codec(form.turbo_config()), seed=data['seed'])
        started = time.perf_counter()
        trace = runner.snr_evolution(data['ebn0'], data['trials'])
        rows = write_csv(output, TRACE_COLUMNS, trace.rows(form.constituents))
        return RunOutcome(rows=rows, timings={'seconds': round(time.perf_counter() - started, 3)})
