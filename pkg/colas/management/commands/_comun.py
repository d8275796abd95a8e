"""
Utilidades compartidas por los comandos de httool
Traducen los errores del dominio a CommandError con el código de salida
"""
from django.core.management.base import CommandError
from rest_framework import serializers

from colas.exceptions import HttoolError

SALIDA_NO_CONVERGE = 1
SALIDA_CONFIGURACION = 2
SALIDA_IO = 3


def errores_a_texto(detalle):
    """Aplanar el detalle de un ValidationError (DRF o Django) como 'campo: mensaje'"""
    if isinstance(detalle, dict):
        return '; '.join(f'{campo}: {errores_a_texto(mensajes)}' for campo, mensajes in detalle.items())
    if isinstance(detalle, (list, tuple)):
        return ' '.join(errores_a_texto(mensaje) for mensaje in detalle)
    return str(detalle)


def command_error(error):
    """CommandError con el código de salida que corresponde a la excepción"""
    if isinstance(error, serializers.ValidationError):
        return CommandError(f'Configuración inválida: {errores_a_texto(error.detail)}', returncode=SALIDA_CONFIGURACION)
    if isinstance(error, HttoolError):
        detalle = error.message_dict if hasattr(error, 'error_dict') else error.messages
        return CommandError(f'Error ({error.code}): {errores_a_texto(detalle)}', returncode=SALIDA_CONFIGURACION)
    if isinstance(error, OSError):
        return CommandError(f'Error de E/S: {error}', returncode=SALIDA_IO)
    raise error
