from django.contrib import admin

from experiments.models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ('command', 'seed', 'rows', 'result_path', 'finished_at')
    list_filter = ('command',)
    search_fields = ('result_path',)
    readonly_fields = ('id', 'config', 'timings', 'created_at')
