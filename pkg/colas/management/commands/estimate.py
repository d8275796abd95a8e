"""
Comando de Django para estimar índices de variación regular desde datos
Uso: httool estimate <samples> --alpha A --t T [--grid x0:factor:count]
"""
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from colas.exceptions import HttoolError
from colas.models import GridSpec
from colas.services import EscenarioService

from ._comun import SALIDA_NO_CONVERGE, command_error


class Command(BaseCommand):
    help = 'Estima los índices de H_α y W_α empíricos y escribe estimate.csv'

    def add_arguments(self, parser):
        parser.add_argument('samples', help='Fichero con una muestra positiva por línea')
        parser.add_argument('--alpha', type=float, required=True, help='Orden α > 0')
        parser.add_argument('--t', type=float, default=2.0, help='Factor de escala t > 1 (por defecto: 2)')
        parser.add_argument('--grid', default=None, help='Rejilla x0:factor:count (por defecto: 10:2:21)')

    def handle(self, *args, **options):
        try:
            rejilla = GridSpec.parse(options['grid']) if options['grid'] else None
            resumen = EscenarioService.estimate_from_data(
                options['samples'], options['alpha'], options['t'], rejilla,
            )
        except (serializers.ValidationError, HttoolError, OSError) as e:
            raise command_error(e)

        for mensaje in resumen.messages:
            self.stdout.write(mensaje)
        for ruta in resumen.files_written:
            self.stdout.write(self.style.SUCCESS(f'Escrito {ruta}'))
        if resumen.exit_code:
            raise CommandError('No hay puntos de la rejilla dentro del rango de las muestras', returncode=SALIDA_NO_CONVERGE)
