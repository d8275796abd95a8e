"""
Punto de entrada de consola `httool`
Traduce `httool <comando> ...` a los comandos de gestión de Django de la app colas
"""
import os
import sys

COMANDOS = ('run', 'estimate', 'transform')


def main(argv=None):
    """Ejecutar un comando de httool"""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'httool.settings')
    from django.core.management import execute_from_command_line

    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ('-h', '--help'):
        sys.stdout.write(
            'Uso: httool {run,estimate,transform} ...\n'
            '  httool run <config>\n'
            '  httool estimate <muestras> --alpha A --t T [--grid x0:factor:count]\n'
            '  httool transform <config> --kind {H|W|Wbar|G|Gbar|Gprime|Gsecond} --x X\n'
        )
        return 0 if argv else 2
    if argv[0] not in COMANDOS:
        sys.stderr.write(f'Comando desconocido: {argv[0]} (opciones: {", ".join(COMANDOS)})\n')
        return 2
    execute_from_command_line(['httool', *argv])
    return 0


if __name__ == '__main__':
    sys.exit(main())
