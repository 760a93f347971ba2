import re

import numpy as np
from django.conf import settings
from rest_framework import serializers

from .exceptions import CoercivityViolated
from .field import EpsParams
from .models import Experiment, SolutionRecord, SweepRow


# Experiment files

class LengthField(serializers.FloatField):
    """Float that also reads multiples of pi written as text: "2pi", "pi/2", "1.5*pi"."""
    PATTERN = re.compile(
        r"^\s*(?P<coef>[-+]?\d*\.?\d*(?:[eE][-+]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
    )

    def to_internal_value(self, data):
        if isinstance(data, str):
            match = self.PATTERN.match(data)
            if match:
                coef = match['coef']
                value = float(coef + "1" if coef in ("", "+", "-") else coef) * np.pi
                if match['den']:
                    value /= float(match['den'])
                data = value
        return super().to_internal_value(data)


def _positive(value, name):
    if value <= 0:
        raise serializers.ValidationError(f"{name} must be positive.")
    return value


class ManifoldSectionSerializer(serializers.Serializer):
    lengths = serializers.ListField(child=LengthField(), min_length=1, max_length=3)
    grid_sizes = serializers.ListField(child=serializers.IntegerField(min_value=8), min_length=1, max_length=3)

    def validate_lengths(self, value):
        for length in value:
            _positive(length, "Every period")
        return value

    def validate(self, attrs):
        if len(attrs['lengths']) != len(attrs['grid_sizes']):
            raise serializers.ValidationError("lengths and grid_sizes must have the same number of axes.")
        return attrs


class ParamsSectionSerializer(serializers.Serializer):
    m = serializers.IntegerField(min_value=1)
    eps = serializers.ListField(child=serializers.FloatField(), min_length=1)
    resolution = serializers.FloatField(default=4.0)

    def validate_eps(self, value):
        for eps in value:
            _positive(eps, "eps")
        if len(set(value)) != len(value):
            raise serializers.ValidationError("eps values must be distinct.")
        return value

    def validate_resolution(self, value):
        return _positive(value, "resolution")


class FlowSectionSerializer(serializers.Serializer):
    step = serializers.FloatField(default=0.5)
    backtrack = serializers.FloatField(default=0.5)
    max_steps = serializers.IntegerField(default=20000, min_value=1)
    stop_delta = serializers.FloatField(default=1e-12)
    solver_tol = serializers.FloatField(default=None, allow_null=True)
    polish_steps = serializers.IntegerField(default=200, min_value=0)
    part_floor = serializers.FloatField(default=1e-6, min_value=0.0)
    collapse_floor = serializers.FloatField(default=1e-3)

    def validate_step(self, value):
        if not 0.0 < value <= 1.0:
            raise serializers.ValidationError("step must lie in (0, 1].")
        return value

    def validate_backtrack(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("backtrack must lie in (0, 1).")
        return value

    def validate_stop_delta(self, value):
        return _positive(value, "stop_delta")

    def validate_collapse_floor(self, value):
        return _positive(value, "collapse_floor")

    def validate_solver_tol(self, value):
        if value is None:
            return settings.NODAL_LAB['SOLVER_TOL']
        return _positive(value, "solver_tol")


class GroundstateSectionSerializer(serializers.Serializer):
    r_max = serializers.FloatField(default=24.0, min_value=4.0)
    samples = serializers.IntegerField(default=8192, min_value=256)
    tol = serializers.FloatField(default=1e-12)

    def validate_tol(self, value):
        return _positive(value, "tol")


class SeedsSectionSerializer(serializers.Serializer):
    STRATEGIES = ['net', 'grid', 'random', 'explicit']

    strategy = serializers.ChoiceField(choices=STRATEGIES, default='net')
    count = serializers.IntegerField(min_value=1, default=None, allow_null=True)
    per_axis = serializers.IntegerField(min_value=2, default=4)
    net_radius = LengthField(default=None, allow_null=True)
    random_seed = serializers.IntegerField(default=0, min_value=0)
    r_cut = LengthField(default=None, allow_null=True)
    pairs = serializers.ListField(
        child=serializers.ListField(
            child=serializers.ListField(child=LengthField(), min_length=1, max_length=3),
            min_length=2, max_length=2,
        ),
        default=list,
    )

    def validate_r_cut(self, value):
        return value if value is None else _positive(value, "r_cut")

    def validate_net_radius(self, value):
        return value if value is None else _positive(value, "net_radius")

    def validate(self, attrs):
        if attrs['strategy'] == 'explicit' and not attrs['pairs']:
            raise serializers.ValidationError({"pairs": "The explicit strategy needs at least one pair."})
        if attrs['strategy'] == 'random' and attrs['count'] is None:
            raise serializers.ValidationError({"count": "The random strategy needs a seed count."})
        return attrs


class ConcentrationSectionSerializer(serializers.Serializer):
    radius = serializers.FloatField(default=10.0)
    eta = serializers.FloatField(default=0.9)

    def validate_radius(self, value):
        return _positive(value, "radius")

    def validate_eta(self, value):
        if not 0.5 < value < 1.0:
            raise serializers.ValidationError("eta must lie in (1/2, 1).")
        return value


class ClusteringSectionSerializer(serializers.Serializer):
    energy_tol = serializers.FloatField(default=1e-3, min_value=0.0)
    shape_tol = serializers.FloatField(default=0.05, min_value=0.0)


class ChecksSectionSerializer(serializers.Serializer):
    pde_factor = serializers.FloatField(default=10.0)
    inequality_slack = serializers.FloatField(default=1e-6, min_value=0.0)

    def validate_pde_factor(self, value):
        return _positive(value, "pde_factor")


class OutputSectionSerializer(serializers.Serializer):
    dir = serializers.CharField(default=None, allow_null=True)
    snapshots = serializers.BooleanField(default=True)


OPTIONAL_SECTIONS = {
    'flow': FlowSectionSerializer,
    'groundstate': GroundstateSectionSerializer,
    'seeds': SeedsSectionSerializer,
    'concentration': ConcentrationSectionSerializer,
    'clustering': ClusteringSectionSerializer,
    'checks': ChecksSectionSerializer,
    'output': OutputSectionSerializer,
}


class ExperimentConfigSerializer(serializers.Serializer):
    schema_version = serializers.IntegerField()
    name = serializers.CharField(required=False, allow_blank=True)
    manifold = ManifoldSectionSerializer()
    params = ParamsSectionSerializer()
    flow = FlowSectionSerializer(required=False)
    groundstate = GroundstateSectionSerializer(required=False)
    seeds = SeedsSectionSerializer(required=False)
    concentration = ConcentrationSectionSerializer(required=False)
    clustering = ClusteringSectionSerializer(required=False)
    checks = ChecksSectionSerializer(required=False)
    output = OutputSectionSerializer(required=False)

    def validate_schema_version(self, value):
        expected = settings.NODAL_LAB['SCHEMA_VERSION']
        if value != expected:
            raise serializers.ValidationError(f"Unsupported schema_version {value}; expected {expected}.")
        return value

    def validate(self, attrs):
        for name, section_class in OPTIONAL_SECTIONS.items():
            if name not in attrs:
                section = section_class(data={})
                section.is_valid(raise_exception=True)
                attrs[name] = section.validated_data

        manifold = attrs['manifold']
        params = attrs['params']
        n = len(manifold['lengths'])
        if n + params['m'] <= 2:
            raise serializers.ValidationError({"params": "n + m must exceed 2."})

        spacings = [length / size for length, size in zip(manifold['lengths'], manifold['grid_sizes'])]
        for eps in params['eps']:
            if max(spacings) > eps / params['resolution'] * (1.0 + 1e-12):
                raise serializers.ValidationError({
                    "params": f"Grid spacing {max(spacings):.4g} exceeds eps/{params['resolution']:g} "
                              f"for eps = {eps:g}; refine the grid or lower the resolution."
                })
            try:
                EpsParams(eps=eps, n=n, m=params['m'])
            except CoercivityViolated as exc:
                raise serializers.ValidationError({"params": str(exc)})

        injectivity_radius = 0.5 * min(manifold['lengths'])
        seeds = attrs['seeds']
        if seeds['r_cut'] is not None and seeds['r_cut'] > injectivity_radius * (1.0 + 1e-12):
            raise serializers.ValidationError({
                "seeds": f"r_cut {seeds['r_cut']:.6g} exceeds the injectivity radius {injectivity_radius:.6g}."
            })
        for pair in seeds['pairs']:
            if any(len(point) != n for point in pair):
                raise serializers.ValidationError({"seeds": f"Seed points must have {n} coordinates."})
        return attrs


class ArchiveRecordSerializer(serializers.Serializer):
    """Shape check for one line of records.jsonl."""
    record_id = serializers.CharField()
    kind = serializers.ChoiceField(choices=['positive', 'nodal'])
    eps = serializers.FloatField()
    index = serializers.IntegerField(min_value=0)
    outcome = serializers.CharField()
    converged = serializers.BooleanField()
    energy = serializers.DictField(allow_null=True)
    seed = serializers.DictField()
    snapshot = serializers.CharField(allow_null=True, allow_blank=True)
    cluster_id = serializers.IntegerField(allow_null=True)


# Database mirror

class SweepRowSerializer(serializers.ModelSerializer):
    class Meta:
        model = SweepRow
        fields = [
            'id', 'eps', 'm_hat', 'd_hat', 'm_ratio', 'd_ratio',
            'inequality_holds', 'cluster_count', 'expected_pairs', 'payload',
        ]
        read_only_fields = fields


class ExperimentSerializer(serializers.ModelSerializer):
    records_count = serializers.SerializerMethodField()

    class Meta:
        model = Experiment
        fields = [
            'id', 'name', 'kind', 'schema_version', 'dimension', 'lengths', 'grid_sizes',
            'fiber_dimension', 'ground_energy', 'config', 'notes', 'archive_path',
            'records_count', 'created_at', 'updated_at',
        ]
        read_only_fields = fields

    def get_records_count(self, obj):
        return obj.records.count()


class SolutionRecordSerializer(serializers.ModelSerializer):
    experiment_name = serializers.CharField(source='experiment.name', read_only=True)

    class Meta:
        model = SolutionRecord
        fields = [
            'id', 'experiment', 'experiment_name', 'record_id', 'kind', 'eps', 'outcome', 'converged',
            'energy', 'grad_norm', 'region', 'separation', 'cluster_id', 'stayed_outside_tubes',
            'snapshot', 'payload',
        ]
        read_only_fields = fields
