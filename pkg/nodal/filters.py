import django_filters
from .models import SolutionRecord


class SolutionRecordFilter(django_filters.FilterSet):
    eps_min = django_filters.NumberFilter(field_name='eps', lookup_expr='gte')
    eps_max = django_filters.NumberFilter(field_name='eps', lookup_expr='lte')

    experiment_name = django_filters.CharFilter(field_name='experiment__name', lookup_expr='icontains')
    experiment_kind = django_filters.CharFilter(field_name='experiment__kind')

    class Meta:
        model = SolutionRecord
        fields = {
            'experiment': ['exact'],
            'kind': ['exact'],
            'outcome': ['exact', 'startswith'],
            'converged': ['exact'],
            'region': ['exact'],
            'cluster_id': ['exact', 'isnull'],
        }
