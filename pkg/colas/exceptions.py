"""
Errores del dominio de httool
Todos son ValidationError de Django con un `code` estable para que los
comandos puedan traducirlos a códigos de salida
"""
from django.core.exceptions import ValidationError


class HttoolError(ValidationError):
    """Base de los errores de httool"""
    default_code = 'httool'

    def __init__(self, message, code=None):
        super().__init__(message, code=code or self.default_code)
        # Con mensajes en forma de diccionario Django no fija `code`
        self.code = code or self.default_code


class DomainError(HttoolError):
    """Parámetro fuera de su dominio (se nombra el parámetro)"""
    default_code = 'domain'


class InputError(HttoolError):
    """Fichero de entrada ilegible o con datos inválidos"""
    default_code = 'input'


class PreconditionError(HttoolError):
    """La operación no es aplicable con estos argumentos"""
    default_code = 'precondition'


class CapabilityError(HttoolError):
    """El modelo no ofrece lo que pide la operación (p. ej. densidad)"""
    default_code = 'capability'


class DivergenceError(HttoolError):
    """Integral impropia no convergente: m(α)=∞ o W_α(∞)=∞"""
    default_code = 'divergence'


class EvaluationError(HttoolError):
    """El integrando devolvió NaN en el punto x"""
    default_code = 'evaluation'

    def __init__(self, message, x=None, code=None):
        super().__init__(message, code=code)
        self.x = x


class UnderflowError(HttoolError):
    """División por un valor por debajo del umbral de underflow en x"""
    default_code = 'underflow'

    def __init__(self, message, x=None, code=None):
        super().__init__(message, code=code)
        self.x = x
