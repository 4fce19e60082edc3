from pathlib import Path

from coding.services.factories import create_turbo_codec
from experiments.forms import BerForm
from experiments.management.base import ExperimentBaseCommand, RunOutcome
from experiments.models import ExperimentCommand
from experiments.services.analysis import ExperimentRunner
from experiments.utils.csv_output import BER_COLUMNS, write_csv


class Command(ExperimentBaseCommand):
    help = "BER/FER-свип по сетке Eb/N0 (--ebn0 start:step:stop)."

    command_name = ExperimentCommand.BER.value
    form_class = BerForm

    def run(self, form: BerForm, output: Path) -> RunOutcome:
        codec = create_turbo_codec(form.turbo_config())
        runner = ExperimentRunner(codec, seed=form.cleaned_data['seed'])
        results = runner.run_ber(form.grid, form.stop_rule)

        timing = form.cleaned_data['timing']
        rows = write_csv(output, BER_COLUMNS, [result.as_row(timing) for result in results])
        return RunOutcome(rows=rows, timings={
            'points': [
                {
                    'ebn0_db': result.ebn0_db,
                    'seconds': round(result.wall_seconds, 3),
                    'under_sampled': result.under_sampled,
                }
                for result in results
            ],
        })
