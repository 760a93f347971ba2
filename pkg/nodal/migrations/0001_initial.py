import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='Experiment',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=255)),
                ('kind', models.CharField(choices=[('ground', 'Ground state'), ('sweep_m', 'Positive energy sweep'), ('sweep_d', 'Nodal energy sweep'), ('multiplicity', 'Multiplicity search'), ('diagnose', 'Diagnostics')], max_length=20)),
                ('schema_version', models.PositiveIntegerField()),
                ('dimension', models.PositiveSmallIntegerField()),
                ('lengths', models.JSONField(default=list)),
                ('grid_sizes', models.JSONField(default=list)),
                ('fiber_dimension', models.PositiveIntegerField()),
                ('ground_energy', models.FloatField(blank=True, null=True)),
                ('config', models.JSONField(default=dict)),
                ('notes', models.JSONField(blank=True, default=list)),
                ('archive_path', models.CharField(max_length=1024, unique=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'ordering': ['-updated_at'],
            },
        ),
        migrations.CreateModel(
            name='SolutionRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('record_id', models.CharField(max_length=64)),
                ('kind', models.CharField(choices=[('positive', 'Positive solution'), ('nodal', 'Sign-changing solution')], max_length=20)),
                ('eps', models.FloatField()),
                ('outcome', models.CharField(max_length=64)),
                ('converged', models.BooleanField(default=False)),
                ('energy', models.FloatField(blank=True, null=True)),
                ('grad_norm', models.FloatField(blank=True, null=True)),
                ('region', models.CharField(blank=True, max_length=20)),
                ('separation', models.FloatField(blank=True, null=True)),
                ('cluster_id', models.IntegerField(blank=True, null=True)),
                ('stayed_outside_tubes', models.BooleanField(default=False)),
                ('snapshot', models.CharField(blank=True, max_length=255)),
                ('payload', models.JSONField(default=dict)),
                ('experiment', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='records', to='nodal.experiment')),
            ],
            options={
                'ordering': ['experiment', '-eps', 'record_id'],
            },
        ),
        migrations.CreateModel(
            name='SweepRow',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('eps', models.FloatField()),
                ('m_hat', models.FloatField(blank=True, null=True)),
                ('d_hat', models.FloatField(blank=True, null=True)),
                ('m_ratio', models.FloatField(blank=True, null=True)),
                ('d_ratio', models.FloatField(blank=True, null=True)),
                ('inequality_holds', models.BooleanField(blank=True, null=True)),
                ('cluster_count', models.IntegerField(blank=True, null=True)),
                ('expected_pairs', models.IntegerField(blank=True, null=True)),
                ('payload', models.JSONField(default=dict)),
                ('experiment', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='sweep_rows', to='nodal.experiment')),
            ],
            options={
                'ordering': ['experiment', '-eps'],
            },
        ),
        migrations.AddConstraint(
            model_name='solutionrecord',
            constraint=models.UniqueConstraint(fields=('experiment', 'record_id'), name='unique_record_per_experiment'),
        ),
    ]
