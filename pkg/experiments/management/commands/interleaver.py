from pathlib import Path
from typing import Any

from django.core.management.base import CommandError

from coding.services.factories import build_intra, build_stream_permutation
from coding.services.interleave import StreamPermutation, check_span, check_spread, is_bijection
from coding.utils.permutation_io import read_permutation, write_permutation
from experiments.forms import InterleaverForm
from experiments.management.base import ExperimentBaseCommand, RunOutcome
from experiments.models import ExperimentCommand


class Command(ExperimentBaseCommand):
    help = (
        "Перемежители: generate - внутриблочная перестановка, compose - составная перестановка потока, "
        "validate - проверка файла (биективность, разнесение, размах)."
    )

    command_name = ExperimentCommand.INTERLEAVER.value
    form_class = InterleaverForm
    output_suffix = '.txt'

    def default_output(self, config: dict[str, Any]) -> Path:
        stem = f"interleaver-{config['action']}-seed{config['seed']}"
        return super().default_output(config).with_stem(stem)

    def run(self, form: InterleaverForm, output: Path) -> RunOutcome | None:
        action = form.cleaned_data['action']
        if action == 'validate':
            self.validate(form)
            return None

        spec = form.interleaver_spec()
        if action == 'generate':
            permutation = build_intra(spec)
        else:
            stream = build_stream_permutation(spec)
            permutation = stream.permutation
            self.stdout.write(
                f"SRID = {stream.srid_bits} бит, средняя задержка = {stream.avg_latency_bits} бит, "
                f"исправлений на краях = {stream.repairs}"
            )
        write_permutation(permutation, output)
        return RunOutcome(rows=permutation.size)

    def validate(self, form: InterleaverForm) -> None:
        """Печатает отчёт pass/fail; при провале проверки команда завершается с кодом 1."""
        data = form.cleaned_data
        permutation = read_permutation(Path(data['input']))
        checks = [('bijective', is_bijection(permutation.mapping))]
        if data.get('spread') is not None:
            spread = data['spread']
            checks.append((f"spread s={spread}", check_spread(permutation.mapping, spread)))

        num_blocks = form.stream_blocks(permutation.size)
        if num_blocks is not None:
            stream = StreamPermutation(
                permutation=permutation,
                block_len=data['block_len'],
                num_blocks=num_blocks,
                span=data['span'],
                boundary_mode=data['boundary'],
                srid_bits=(1 + data['span']) * data['block_len'],
                avg_latency_bits=(1 + data['span']) * data['block_len'],
            )
            checks.append((f"span S={data['span']}", check_span(stream)))

        self.stdout.write(f"N = {permutation.size}")
        for name, passed in checks:
            self.stdout.write(f"{name}: {'pass' if passed else 'fail'}")
        failed = [name for name, passed in checks if not passed]
        if failed:
            raise CommandError(f"Проверка не пройдена: {', '.join(failed)}.", returncode=1)
