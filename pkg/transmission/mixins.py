from pathlib import Path

from django.conf import settings

from .forms import load_config


class RunOptionsMixin:
    """Mixin adding the shared run flags to a management command."""

    def add_run_arguments(self, parser, config_required=True):
        parser.add_argument(
            '--config',
            required=config_required,
            help='Path to the RunConfig JSON document',
        )
        parser.add_argument(
            '--seed',
            type=int,
            help='Override sampling.seed',
        )
        parser.add_argument(
            '--exact',
            action='store_true',
            help='Use exact probabilities instead of sampled counts (N treated as infinite)',
        )
        parser.add_argument(
            '--output-dir',
            help='Directory for the output files (overrides output_dir in the config)',
        )

    def load_run_config(self, options):
        """Validated config and raw document, both with the command-line overrides applied.

        The raw document is what gets hashed, so a run with --seed or --exact
        never shares a config hash with the file it was read from.
        """
        raw, config = load_config(options['config'])
        sampling = config.get('sampling')
        if sampling is None:
            return raw, config
        overrides = {}
        if options.get('seed') is not None:
            overrides['seed'] = options['seed']
        if options.get('exact'):
            overrides['exact'] = True
        if overrides:
            sampling.update(overrides)
            raw = {**raw, 'sampling': {**(raw.get('sampling') or {}), **overrides}}
        return raw, config

    def output_dir(self, options, config):
        chosen = options.get('output_dir') or config.get('output_dir')
        return Path(chosen) if chosen else Path(settings.PHASEGUARD['OUTPUT_DIR'])

    def finish_run(self, outcome):
        """Write the ledger entry (when enabled) and list the files produced."""
        from .models import SimulationRun

        if settings.PHASEGUARD.get('RECORD_RUNS'):
            SimulationRun.record(outcome)
        for path in outcome.files:
            self.stdout.write(f'  wrote {path}')
        self.stdout.write(
            self.style.SUCCESS(
                f'{outcome.mode} run {outcome.config_hash[:12]} finished (seed {outcome.seed})'
            )
        )
