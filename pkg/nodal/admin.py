from django.contrib import admin
from .models import Experiment, SolutionRecord, SweepRow


class SweepRowInline(admin.TabularInline):
    model = SweepRow
    extra = 0
    fields = ('eps', 'm_hat', 'd_hat', 'm_ratio', 'd_ratio', 'inequality_holds', 'cluster_count')
    readonly_fields = fields
    can_delete = False


@admin.register(Experiment)
class ExperimentAdmin(admin.ModelAdmin):
    list_display = ('name', 'kind', 'dimension', 'fiber_dimension', 'ground_energy', 'updated_at')
    list_filter = ('kind', 'dimension')
    search_fields = ('name', 'archive_path')
    readonly_fields = ('created_at', 'updated_at')
    list_per_page = 25

    fieldsets = (
        (None, {
            'fields': ('name', 'kind', 'archive_path', 'schema_version')
        }),
        ('Manifold', {
            'fields': ('dimension', 'lengths', 'grid_sizes', 'fiber_dimension', 'ground_energy')
        }),
        ('Configuration', {
            'fields': ('config', 'notes'),
            'classes': ('collapse',)
        }),
        ('Timestamps', {
            'fields': ('created_at', 'updated_at'),
            'classes': ('collapse',)
        }),
    )
    inlines = [SweepRowInline]


@admin.register(SolutionRecord)
class SolutionRecordAdmin(admin.ModelAdmin):
    list_display = ('record_id', 'experiment', 'kind', 'eps', 'outcome', 'converged', 'energy', 'separation',
                    'cluster_id')
    list_filter = ('kind', 'converged', 'region', 'experiment')
    search_fields = ('record_id', 'outcome', 'experiment__name')
    list_per_page = 50


@admin.register(SweepRow)
class SweepRowAdmin(admin.ModelAdmin):
    list_display = ('experiment', 'eps', 'm_hat', 'd_hat', 'inequality_holds', 'cluster_count')
    list_filter = ('experiment', 'inequality_holds')
