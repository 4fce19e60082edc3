import time
from pathlib import Path

from coding.services.factories import create_turbo_codec
from experiments.forms import ExitForm
from experiments.management.base import ExperimentBaseCommand, RunOutcome
from experiments.models import ExperimentCommand
from experiments.services.analysis import ExperimentRunner
from experiments.utils.csv_output import EXIT_COLUMNS, write_csv


class Command(ExperimentBaseCommand):
    help = (
        "EXIT-характеристики обеих компонент при заданном Eb/N0 (--ebn0, --ia start:step:stop); "
        "с --trajectory - траектория реального итеративного декодирования."
    )

    command_name = ExperimentCommand.EXIT.value
    form_class = ExitForm

    def run(self, form: ExitForm, output: Path) -> RunOutcome:
        data = form.cleaned_data
        runner = ExperimentRunner(create_turbo_codec(form.turbo_config()), seed=data['seed'])

        started = time.perf_counter()
        if data['trajectory']:
            points = runner.exit_trajectory(data['ebn0'], data['trials'])
        else:
            points = runner.exit_chart(data['ebn0'], form.ia_grid, data['samples'])
        rows = write_csv(output, EXIT_COLUMNS, [point.as_row() for point in points])
        return RunOutcome(rows=rows, timings={'seconds': round(time.perf_counter() - started, 3)})
