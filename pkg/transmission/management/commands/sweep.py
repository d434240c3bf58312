"""
Management command to sweep a configuration over a grid of N, epsilon, channel parameter and gamma.
Usage: python manage.py sweep --config path/to/sweep.json [--seed N] [--exact] [--output-dir DIR]
"""
from django.core.management.base import BaseCommand

from transmission.decorators import translates_errors
from transmission.exceptions import ConfigError
from transmission.mixins import RunOptionsMixin
from transmission.runner import execute


class Command(RunOptionsMixin, BaseCommand):
    help = 'Run a parameter sweep and write one summary row per grid point'

    def add_arguments(self, parser):
        self.add_run_arguments(parser)

    @translates_errors
    def handle(self, *args, **options):
        raw, config = self.load_run_config(options)
        if config['mode'] != 'sweep':
            raise ConfigError('mode', f"the sweep command needs mode 'sweep', got {config['mode']!r}")
        outcome = execute(raw, config, self.output_dir(options, config))

        for row in outcome.rows:
            label = f'N={row.total_photons} eps={row.epsilon:g} param={row.param:g}'
            if row.error:
                self.stdout.write(self.style.WARNING(f'{label}: {row.error}'))
            else:
                self.stdout.write(
                    f'{label} gamma={row.summary.gamma:.3g}: '
                    f'd_MSE={row.summary.d_mse:.6g} F_t={row.summary.f_t:.6g}'
                )
        self.finish_run(outcome)
