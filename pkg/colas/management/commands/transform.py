"""
Comando de Django para evaluar una transformada en un punto
Uso: httool transform <config> --kind {H|W|Wbar|G|Gbar|Gprime|Gsecond} --x X
"""
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from colas.dist_models import DistribucionService
from colas.exceptions import HttoolError
from colas.models import TransformKind, TransformParams
from colas.services import EscenarioService
from colas.transforms import TransformService

from ._comun import SALIDA_NO_CONVERGE, command_error


class Command(BaseCommand):
    help = 'Evalúa una transformada del modelo de un fichero de escenario en un punto x'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Fichero de escenario clave = valor')
        parser.add_argument('--kind', required=True, choices=TransformKind.values, help='Transformada')
        parser.add_argument('--x', type=float, required=True, help='Punto x ≥ 0')

    def handle(self, *args, **options):
        try:
            config = EscenarioService.build_config(options['config'], require_diagnostics=False)
            modelo = DistribucionService.make_model(config.family)
            p = TransformParams(config.alpha, config.quad)
            valores, errores, convergio = TransformService.evaluate_grid(
                modelo, options['kind'], p, [options['x']], full_output=True,
            )
        except (serializers.ValidationError, HttoolError, OSError) as e:
            raise command_error(e)

        self.stdout.write(repr(float(valores[0])))
        if not convergio:
            raise CommandError(
                f'Cuadratura sin convergencia: error estimado {float(errores[0]):.3e}', returncode=SALIDA_NO_CONVERGE,
            )
