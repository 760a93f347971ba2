import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from nodal.archive import m_error_trend, publish_archive, summary_rows
from nodal.config import load_config
from nodal.exceptions import NodalLabError
from nodal.lab import run_diagnose, run_experiment

SUBCOMMANDS = ['ground', 'sweep-m', 'sweep-d', 'multiplicity', 'diagnose']

REPORT_COLUMNS = ['eps', 'm_hat', 'd_hat', 'm_ratio', 'd_ratio', 'inequality_holds', 'converged', 'failed',
                  'cluster_count', 'expected_pairs']


def _format(value):
    if value is None:
        return '-'
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


class Command(BaseCommand):
    help = "Run a nodal-solution experiment (ground, sweep-m, sweep-d, multiplicity) or re-diagnose an archive."

    def add_arguments(self, parser):
        parser.add_argument('subcommand', choices=SUBCOMMANDS)
        parser.add_argument('--config', help="Experiment YAML file.")
        parser.add_argument('--out', help="Archive directory (overrides output.dir).")
        parser.add_argument('--eps', type=float, nargs='+', help="Override the eps list.")
        parser.add_argument('--seeds', type=int, help="Override the number of seed pairs.")
        parser.add_argument('--jobs', type=int, help="Worker processes for the seeds of one eps.")
        parser.add_argument('--quiet', action='store_true', help="Only log warnings and errors.")
        parser.add_argument('--publish', action='store_true', help="Mirror the archive into the database.")

    def handle(self, *args, **options):
        if options['quiet']:
            logging.getLogger('nodal').setLevel(logging.WARNING)
        kind = options['subcommand'].replace('-', '_')

        try:
            if kind == 'diagnose':
                path = options['out']
                if path is None and options['config']:
                    path = load_config(options['config']).output_dir
                if path is None:
                    raise CommandError("diagnose needs --out or --config.")
                archive = run_diagnose(path)
            else:
                if not options['config']:
                    raise CommandError(f"{options['subcommand']} needs --config.")
                config = load_config(options['config'])
                if options['eps'] or options['seeds'] is not None or options['out'] is not None:
                    config = config.with_overrides(eps=options['eps'], seeds=options['seeds'], out=options['out'])
                jobs = options['jobs'] or settings.NODAL_LAB['JOBS']
                archive = run_experiment(config, kind, jobs=jobs)
                path = config.output_dir
        except NodalLabError as exc:
            raise CommandError(str(exc)) from exc

        if options['publish']:
            experiment = publish_archive(archive, path)
            self.stdout.write(f"Published as experiment #{experiment.pk}.")

        self._report(archive, path)

    def _report(self, archive, path):
        if archive.mE is not None:
            self.stdout.write(f"m(E) = {archive.mE:.10g}")
        for note in archive.notes:
            self.stdout.write(note)
        rows = summary_rows(archive)
        if rows:
            self.stdout.write(" ".join(f"{column:>14}" for column in REPORT_COLUMNS))
            for row in rows:
                self.stdout.write(" ".join(f"{_format(row[column]):>14}" for column in REPORT_COLUMNS))
            trend = m_error_trend(rows)
            if trend is not None:
                self.stdout.write(f"|m_hat/m(E) - 1| decreases as eps decreases: {'yes' if trend else 'no'}")
        self.stdout.write(self.style.SUCCESS(f"{archive.kind}: {len(archive.records)} records in {path}"))
