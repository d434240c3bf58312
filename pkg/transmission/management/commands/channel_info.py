"""
Management command to print the noise-parameter table of a channel.
Usage: python manage.py channel_info --channel bit_flip --param 0.2
       python manage.py channel_info --config path/to/config.json
"""
from django.core.management.base import BaseCommand

from transmission.decorators import translates_errors
from transmission.forms import validate_config
from transmission.mixins import RunOptionsMixin
from transmission.runner import NOISE_COLUMNS, execute


class Command(RunOptionsMixin, BaseCommand):
    help = 'Show A1..A4, B1, B2, C1, C2 and chi of one channel (two for an EPR config)'

    def add_arguments(self, parser):
        self.add_run_arguments(parser, config_required=False)
        parser.add_argument('--channel', help='Catalog channel name, or "custom"')
        parser.add_argument('--param', type=float, help='Channel parameter p, gamma or lambda')
        parser.add_argument('--path', help='Kraus file for a custom channel')
        parser.add_argument('--nu', type=float, help='RTN switching rate')
        parser.add_argument('--coupling', type=float, help='RTN coupling strength')
        parser.add_argument('--t', type=float, help='RTN evolution time')

    def _inline_config(self, options):
        channel = {'name': options['channel']}
        for key in ('param', 'path', 'nu', 'coupling', 't'):
            if options.get(key) is not None:
                channel[key] = options[key]
        raw = {'mode': 'channel-info', 'channel': channel}
        return raw, validate_config(raw)

    @translates_errors
    def handle(self, *args, **options):
        if options.get('config'):
            raw, config = self.load_run_config(options)
            raw = {**raw, 'mode': 'channel-info'}
            config['mode'] = 'channel-info'
        elif options.get('channel'):
            raw, config = self._inline_config(options)
        else:
            self.stdout.write(self.style.WARNING('Give --config or --channel'))
            return
        outcome = execute(raw, config, self.output_dir(options, config))

        for row in outcome.rows:
            values = dict(zip(NOISE_COLUMNS, row))
            self.stdout.write(self.style.SUCCESS(f"{values['channel']} [{values['class']}]"))
            for column in NOISE_COLUMNS[1:-1]:
                self.stdout.write(f'  {column:>5} = {values[column]:.12g}')
        self.finish_run(outcome)
