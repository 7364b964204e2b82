from django.contrib import admin

from .models import ResultRecord, ScenarioRun


class ResultRecordInline(admin.TabularInline):
    model = ResultRecord
    extra = 0
    fields = ['orden', 'seed', 'sweep_value', 'osnr_db', 'scheme', 'ber', 'q_db', 'skew_est_ps']
    readonly_fields = fields


@admin.register(ScenarioRun)
class ScenarioRunAdmin(admin.ModelAdmin):
    list_display = ['name', 'preset', 'mode', 'status', 'fecha_creacion']
    list_filter = ['mode', 'status']
    search_fields = ['name', 'preset']
    inlines = [ResultRecordInline]


@admin.register(ResultRecord)
class ResultRecordAdmin(admin.ModelAdmin):
    list_display = ['run', 'orden', 'seed', 'sweep_value', 'scheme', 'ber', 'skew_est_ps']
    list_filter = ['scheme']
