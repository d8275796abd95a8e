"""
Comando de Django para ejecutar un escenario de diagnósticos
Uso: httool run <config>
"""
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from colas.exceptions import HttoolError
from colas.services import EscenarioService

from ._comun import SALIDA_NO_CONVERGE, command_error


class Command(BaseCommand):
    help = 'Ejecuta los diagnósticos de un fichero de escenario y escribe CSV y summary.txt'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Fichero de escenario clave = valor')

    def handle(self, *args, **options):
        try:
            config = EscenarioService.build_config(options['config'])
            self.stdout.write(f'Escenario {config.family.family} α={config.alpha:g} -> {config.output_dir}')
            resumen = EscenarioService.run_scenario(config)
        except (serializers.ValidationError, HttoolError, OSError) as e:
            raise command_error(e)

        for nombre, convergio in resumen.verdicts.items():
            error_final = resumen.final_errors[nombre]
            if convergio:
                self.stdout.write(self.style.SUCCESS(f'  ✓ {nombre}: error final {error_final:.3e}'))
            else:
                self.stdout.write(self.style.WARNING(f'  ⚠ {nombre}: no converge (error final {error_final:.3e})'))
        for mensaje in resumen.messages:
            self.stdout.write(f'    {mensaje}')
        self.stdout.write(f'{len(resumen.files_written)} ficheros escritos en {resumen.wall_time:.2f} s')

        if resumen.exit_code:
            raise CommandError('Algún diagnóstico no converge', returncode=SALIDA_NO_CONVERGE)
        self.stdout.write(self.style.SUCCESS('Todos los diagnósticos convergen'))
