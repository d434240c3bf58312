"""
Management command to run a simulation described by a RunConfig.
Usage: python manage.py run --config path/to/config.json [--seed N] [--exact] [--output-dir DIR]
"""
import math

from django.core.management.base import BaseCommand

from transmission.decorators import translates_errors
from transmission.mixins import RunOptionsMixin
from transmission.runner import execute


class Command(RunOptionsMixin, BaseCommand):
    help = 'Run a single-qubit, EPR, channel-info or sweep configuration'

    def add_arguments(self, parser):
        self.add_run_arguments(parser)

    @translates_errors
    def handle(self, *args, **options):
        raw, config = self.load_run_config(options)
        outcome = execute(raw, config, self.output_dir(options, config))
        summary = outcome.summary
        if 'd_mse' in summary:
            self.stdout.write(
                f"d_MSE = {summary['d_mse']:.6g}, F_t = {summary['f_t']:.6g} "
                f"(gamma = {summary['gamma']:.6g}, {summary['trials']} trials)"
            )
            if summary['undecodable']:
                self.stdout.write(
                    self.style.WARNING(f"{summary['undecodable']} trials were undecodable")
                )
            if not math.isnan(summary['chi']) and summary['chi'] != 1.0 and config['correction'] == 'none':
                self.stdout.write(
                    self.style.WARNING(f"channel chi = {summary['chi']:.6g}; consider a flip correction")
                )
        self.finish_run(outcome)
