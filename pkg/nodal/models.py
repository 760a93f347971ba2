from django.db import models


class Experiment(models.Model):
    KIND_CHOICES = [
        ('ground', 'Ground state'),
        ('sweep_m', 'Positive energy sweep'),
        ('sweep_d', 'Nodal energy sweep'),
        ('multiplicity', 'Multiplicity search'),
        ('diagnose', 'Diagnostics'),
    ]

    name = models.CharField(max_length=255)
    kind = models.CharField(max_length=20, choices=KIND_CHOICES)
    schema_version = models.PositiveIntegerField()
    dimension = models.PositiveSmallIntegerField()
    lengths = models.JSONField(default=list)
    grid_sizes = models.JSONField(default=list)
    fiber_dimension = models.PositiveIntegerField()
    ground_energy = models.FloatField(null=True, blank=True)
    config = models.JSONField(default=dict)
    notes = models.JSONField(default=list, blank=True)
    archive_path = models.CharField(max_length=1024, unique=True)
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ['-updated_at']

    def __str__(self):
        return f"{self.name} ({self.kind})"


class SolutionRecord(models.Model):
    KIND_CHOICES = [
        ('positive', 'Positive solution'),
        ('nodal', 'Sign-changing solution'),
    ]

    experiment = models.ForeignKey(Experiment, related_name='records', on_delete=models.CASCADE)
    record_id = models.CharField(max_length=64)
    kind = models.CharField(max_length=20, choices=KIND_CHOICES)
    eps = models.FloatField()
    outcome = models.CharField(max_length=64)
    converged = models.BooleanField(default=False)
    energy = models.FloatField(null=True, blank=True)
    grad_norm = models.FloatField(null=True, blank=True)
    region = models.CharField(max_length=20, blank=True)
    separation = models.FloatField(null=True, blank=True)
    cluster_id = models.IntegerField(null=True, blank=True)
    stayed_outside_tubes = models.BooleanField(default=False)
    snapshot = models.CharField(max_length=255, blank=True)
    payload = models.JSONField(default=dict)

    class Meta:
        ordering = ['experiment', '-eps', 'record_id']
        constraints = [
            models.UniqueConstraint(fields=['experiment', 'record_id'], name='unique_record_per_experiment'),
        ]

    def __str__(self):
        return f"{self.record_id} [{self.outcome}]"


class SweepRow(models.Model):
    experiment = models.ForeignKey(Experiment, related_name='sweep_rows', on_delete=models.CASCADE)
    eps = models.FloatField()
    m_hat = models.FloatField(null=True, blank=True)
    d_hat = models.FloatField(null=True, blank=True)
    m_ratio = models.FloatField(null=True, blank=True)
    d_ratio = models.FloatField(null=True, blank=True)
    inequality_holds = models.BooleanField(null=True, blank=True)
    cluster_count = models.IntegerField(null=True, blank=True)
    expected_pairs = models.IntegerField(null=True, blank=True)
    payload = models.JSONField(default=dict)

    class Meta:
        ordering = ['experiment', '-eps']

    def __str__(self):
        return f"{self.experiment.name} eps={self.eps:g}"
