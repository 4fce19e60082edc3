"""
Формы проверки флагов командной строки.

Каждая форма разрешает значения по умолчанию (``resolved_config``), поэтому
манифест хранит полную конфигурацию, а повторный запуск подаёт её обратно
в ту же форму.
"""
from typing import Any

from django import forms
from django.conf import settings

from coding.exceptions import ConfigurationError
from coding.services.interleave import IbpConfig, default_spread
from coding.services.siso import Algorithm, DecoderMode, WindowConfig
from coding.services.turbo import InterleaverSpec, IntraKind, Rate, TurboConfig, Variant
from experiments.mixins import ErrorFormattingMixin
from experiments.services.analysis import StopRule
from experiments.utils.grid import parse_grid


def enum_choices(enum) -> list[tuple[str, str]]:
    return [(item.value, item.value) for item in enum]


def default_num_blocks(span: int) -> int:
    """Число блоков потока по умолчанию: один блок для классического кода, иначе max(2S+1, 10)."""
    return 1 if span == 0 else max(2 * span + 1, 10)


class InterleaverFieldsForm(ErrorFormattingMixin, forms.Form):
    """Параметры перемежителя: внутриблочная часть, IBP и зерно."""

    block_len = forms.IntegerField(min_value=1, required=False)
    span = forms.IntegerField(min_value=0, required=False)
    period = forms.IntegerField(min_value=1, required=False)
    step = forms.IntegerField(min_value=1, required=False)
    boundary = forms.ChoiceField(choices=[('wrap', 'wrap'), ('clamp', 'clamp')], required=False)
    num_blocks = forms.IntegerField(min_value=1, required=False)
    intra = forms.ChoiceField(choices=enum_choices(IntraKind), required=False)
    spread = forms.IntegerField(min_value=1, required=False)
    intra_file = forms.CharField(required=False)
    rows = forms.IntegerField(min_value=1, required=False)
    no_ibp_spread = forms.BooleanField(required=False)
    seed = forms.IntegerField(min_value=0, required=False)

    block_len_required = True

    def clean(self) -> dict[str, Any]:
        """
        Подставляет значения по умолчанию и проверяет согласованность параметров перемежителя.

        Ошибка ``ConfigurationError`` привязывается к полю, которое она называет.
        """
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data

        if cleaned_data.get('block_len') is None:
            if self.block_len_required:
                self.add_error('block_len', "Обязательный параметр.")
                return cleaned_data
        self._set_default('span', 0)
        self._set_default('step', 1)
        self._set_default('boundary', 'wrap')
        self._set_default('intra', IntraKind.SRANDOM.value)
        self._set_default('seed', 0)
        self._set_default('num_blocks', default_num_blocks(cleaned_data['span']))
        cleaned_data['period'] = cleaned_data.get('period') or 2 * cleaned_data['span'] + 1
        cleaned_data['intra_file'] = cleaned_data.get('intra_file') or None

        if cleaned_data['block_len'] is not None:
            if cleaned_data['intra'] == IntraKind.SRANDOM and cleaned_data.get('spread') is None:
                cleaned_data['spread'] = default_spread(cleaned_data['block_len'])
            self._validate_config(self.interleaver_spec().ibp.validate)
        return cleaned_data

    def _set_default(self, name: str, value: Any) -> None:
        if self.cleaned_data.get(name) in (None, ''):
            self.cleaned_data[name] = value

    def _validate_config(self, validate) -> None:
        try:
            validate()
        except ConfigurationError as e:
            self.add_error(e.field if e.field in self.fields else None, str(e))

    def interleaver_spec(self) -> InterleaverSpec:
        data = self.cleaned_data
        ibp = IbpConfig(
            block_len=data['block_len'],
            span=data['span'],
            num_blocks=data['num_blocks'],
            period=data['period'],
            step=data['step'],
            boundary_mode=data['boundary'],
        )
        return InterleaverSpec(
            ibp=ibp,
            intra=IntraKind(data['intra']),
            spread=data.get('spread'),
            seed=data['seed'],
            rows=data.get('rows'),
            intra_file=data['intra_file'],
            ibp_aware=not data['no_ibp_spread'],
        )

    def resolved_config(self) -> dict[str, Any]:
        """Конфигурация с подставленными значениями, пригодная для JSON и повторной подачи в форму."""
        return {name: self.cleaned_data.get(name) for name in self.fields}


class CodeForm(InterleaverFieldsForm):
    """Параметры турбо-кода: скорость, вариант завершения, итерации и алгоритм декодера."""

    rate = forms.ChoiceField(choices=enum_choices(Rate), required=False)
    variant = forms.ChoiceField(choices=enum_choices(Variant), required=False)
    iters = forms.IntegerField(min_value=1, required=False)
    algo = forms.ChoiceField(choices=enum_choices(Algorithm), required=False)
    window = forms.IntegerField(min_value=1, required=False)
    warmup = forms.IntegerField(min_value=0, required=False)

    def clean(self) -> dict[str, Any]:
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data

        self._set_default('rate', Rate.THIRD.value)
        self._set_default('variant', Variant.TAIL_PADDED.value)
        self._set_default('iters', 10)
        self._set_default('algo', Algorithm.LOG_MAP.value)

        variant = cleaned_data['variant']
        if variant == Variant.CONTINUOUS:
            self._set_default('window', settings.SISO_WINDOW_LEN)
            self._set_default('warmup', min(settings.SISO_WARMUP_LEN, cleaned_data['window']))
        elif cleaned_data.get('window') is not None or cleaned_data.get('warmup') is not None:
            if variant == Variant.TAIL_PADDED:
                self.add_error('window', "Скользящее окно применяется только в вариантах TB и C.")
                return cleaned_data
            if cleaned_data.get('window') is None:
                self.add_error('window', "Длина разгона задана без длины окна.")
                return cleaned_data
            self._set_default('warmup', min(settings.SISO_WARMUP_LEN, cleaned_data['window']))

        self._validate_config(self.turbo_config().validate)
        return cleaned_data

    def turbo_config(self) -> TurboConfig:
        data = self.cleaned_data
        window = None if data.get('window') is None else WindowConfig(data['window'], data['warmup'])
        return TurboConfig(
            interleaver=self.interleaver_spec(),
            rate=Rate(data['rate']),
            variant=Variant(data['variant']),
            iterations=data['iters'],
            decoder_mode=DecoderMode(algorithm=Algorithm(data['algo']), window=window),
        )


class BerForm(CodeForm):
    ebn0 = forms.CharField()
    blocks = forms.IntegerField(min_value=1, required=False)
    min_errors = forms.IntegerField(min_value=1, required=False)
    timing = forms.BooleanField(required=False)

    def clean_ebn0(self) -> str:
        """Проверяет сетку Eb/N0; в конфигурации сохраняется исходная строка."""
        text = self.cleaned_data['ebn0']
        try:
            parse_grid(text)
        except ValueError as e:
            raise forms.ValidationError(str(e)) from e
        return text

    def clean(self) -> dict[str, Any]:
        cleaned_data = super().clean()
        self._set_default('blocks', settings.BER_MAX_BLOCKS)
        self._set_default('min_errors', settings.BER_MIN_BIT_ERRORS)
        return cleaned_data

    @property
    def grid(self) -> list[float]:
        return parse_grid(self.cleaned_data['ebn0'])

    @property
    def stop_rule(self) -> StopRule:
        data = self.cleaned_data
        return StopRule(max_blocks=data['blocks'], min_bit_errors=data['min_errors'])


class ExitForm(CodeForm):
    """EXIT-диаграмма по гауссовой модели или траектория реального декодирования (``trajectory``)."""

    ebn0 = forms.FloatField()
    ia = forms.CharField(required=False)
    samples = forms.IntegerField(min_value=1, required=False)
    trajectory = forms.BooleanField(required=False)
    trials = forms.IntegerField(min_value=1, required=False)

    def clean_ia(self) -> str:
        text = self.cleaned_data.get('ia') or '0.0:0.1:0.9'
        try:
            values = parse_grid(text)
        except ValueError as e:
            raise forms.ValidationError(str(e)) from e
        if not all(0.0 <= value < 1.0 for value in values):
            raise forms.ValidationError("Априорная взаимная информация должна лежать в [0, 1).")
        return text

    def clean(self) -> dict[str, Any]:
        cleaned_data = super().clean()
        self._set_default('samples', 20_000)
        self._set_default('trials', 10)
        return cleaned_data

    @property
    def ia_grid(self) -> list[float]:
        return parse_grid(self.cleaned_data['ia'])


class TraceForm(CodeForm):
    """Параметры трасс по итерациям (эволюция SNR и ковариация)."""

    CONSTITUENTS = {'1': (1,), '2': (2,), 'both': (1, 2)}

    ebn0 = forms.FloatField()
    trials = forms.IntegerField(min_value=1, required=False)
    constituent = forms.ChoiceField(choices=[(key, key) for key in CONSTITUENTS], required=False)

    def clean(self) -> dict[str, Any]:
        cleaned_data = super().clean()
        self._set_default('trials', 10)
        # по умолчанию - выход второй компоненты, завершающий итерацию
        self._set_default('constituent', '2')
        return cleaned_data

    @property
    def constituents(self) -> tuple[int, ...]:
        return self.CONSTITUENTS[self.cleaned_data['constituent']]


class InterleaverForm(InterleaverFieldsForm):
    """Действия с перемежителями: generate, validate, compose."""

    ACTIONS = ('generate', 'validate', 'compose')

    action = forms.ChoiceField(choices=[(action, action) for action in ACTIONS])
    input = forms.CharField(required=False)

    block_len_required = False

    def clean(self) -> dict[str, Any]:
        explicit_spread = self.cleaned_data.get('spread')
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data

        action = cleaned_data['action']
        if action == 'validate':
            # разнесение проверяется только по явному --spread
            cleaned_data['spread'] = explicit_spread
            if not cleaned_data.get('input'):
                self.add_error('input', "Для validate нужен файл перестановки.")
        elif cleaned_data.get('block_len') is None:
            self.add_error('block_len', f"Обязательный параметр для {action}.")
        elif action == 'generate' and cleaned_data['intra'] == IntraKind.FILE:
            self.add_error('intra', "generate строит перестановку, а не читает её из файла.")
        cleaned_data['input'] = cleaned_data.get('input') or None
        return cleaned_data

    def stream_blocks(self, size: int) -> int | None:
        """Число блоков проверяемой перестановки длины size, если задана длина блока."""
        block_len = self.cleaned_data.get('block_len')
        if block_len is None:
            return None
        if size % block_len:
            raise ConfigurationError(f"Длина перестановки {size} не кратна L={block_len}.", 'block_len')
        return size // block_len
