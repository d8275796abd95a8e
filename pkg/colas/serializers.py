"""
Serializers de httool
Validación de los ficheros de escenario y representación de los informes
que se escriben en CSV y en summary.txt
"""
from decouple import config
from django.conf import settings
from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers

from .models import (
    DIAGNOSTIC_ITEMS, Familia, FamilySpec, GridSpec, QuadratureConfig, ScenarioConfig,
)

GRUPOS = ('rv', 'karamata', 'dehaan', 'corollary', 'montecarlo')
# Diagnósticos que se piden uno a uno en `diagnostics`
ITEMS_DIRECTOS = tuple(i for i in DIAGNOSTIC_ITEMS if i not in ('K1', 'K2'))
ITEMS_CON_THETA = ('T1d', 'T1f', 'T1g', 'T1h', 'T2d', 'T2e', 'T2g', 'D1', 'rv')


def detalle_de(error):
    """Diccionario campo -> mensajes de un ValidationError de Django"""
    if hasattr(error, 'error_dict'):
        return error.message_dict
    return {'non_field_errors': error.messages}


class ScenarioConfigSerializer(serializers.Serializer):
    """Serializer para los ficheros de escenario de `httool run`"""
    family = serializers.ChoiceField(choices=Familia.choices)
    beta = serializers.FloatField(required=False)
    scale = serializers.FloatField(required=False, default=1.0)
    log_power = serializers.FloatField(required=False, default=0.0)
    rate = serializers.FloatField(required=False)
    atom = serializers.FloatField(required=False)
    samples_path = serializers.CharField(required=False)
    alpha = serializers.FloatField()
    theta = serializers.FloatField(required=False, allow_null=True, default=None)
    diagnostics = serializers.CharField(required=False, allow_blank=True, default='')
    grid = serializers.CharField(required=False, default='10:2:21')
    ratio_rel = serializers.FloatField(required=False)
    quad_rel_tol = serializers.FloatField(required=False)
    quad_abs_tol = serializers.FloatField(required=False)
    quad_max_subdivisions = serializers.IntegerField(required=False)
    output_dir = serializers.CharField(required=False)
    seed = serializers.IntegerField(required=False, default=0, min_value=0, max_value=2 ** 64 - 1)
    options = serializers.DictField(
        child=serializers.DictField(child=serializers.CharField()), required=False, default=dict,
    )

    def validate_alpha(self, value):
        """Validar que α sea estrictamente positivo"""
        if not value > 0:
            raise serializers.ValidationError('alpha debe ser estrictamente positivo')
        return value

    def validate_theta(self, value):
        if value is not None and value < 0:
            raise serializers.ValidationError('theta debe ser no negativo')
        return value

    def validate_ratio_rel(self, value):
        if not value > 0:
            raise serializers.ValidationError('ratio_rel debe ser estrictamente positivo')
        return value

    def validate_diagnostics(self, value):
        """Convertir la lista separada por comas y comprobar cada identificador"""
        diagnosticos = tuple(d.strip() for d in value.split(',') if d.strip())
        if not diagnosticos and self.context.get('require_diagnostics', True):
            raise serializers.ValidationError('Se requiere al menos un diagnóstico')
        desconocidos = [d for d in diagnosticos if d not in ITEMS_DIRECTOS and d not in GRUPOS]
        if desconocidos:
            raise serializers.ValidationError(
                f'Diagnósticos desconocidos: {", ".join(desconocidos)}. '
                f'Disponibles: {", ".join(ITEMS_DIRECTOS + GRUPOS)}'
            )
        return diagnosticos

    def validate_grid(self, value):
        try:
            return GridSpec.parse(value)
        except DjangoValidationError as e:
            raise serializers.ValidationError(detalle_de(e).get('grid', e.messages))

    def validate(self, data):
        """Validar coherencia entre familia, parámetros, θ y diagnósticos"""
        necesitan_theta = [d for d in data['diagnostics'] if d in ITEMS_CON_THETA]
        if necesitan_theta and data.get('theta') is None:
            raise serializers.ValidationError({
                'theta': f'Obligatorio para los diagnósticos {", ".join(necesitan_theta)}'
            })

        params = {
            nombre: data[nombre]
            for nombre in ('beta', 'scale', 'log_power', 'rate', 'atom', 'samples_path')
            if data.get(nombre) is not None
        }
        especificacion = FamilySpec(data['family'], params)
        try:
            especificacion.clean()
            quad = QuadratureConfig(
                rel_tol=data.get('quad_rel_tol', settings.HTTOOL_QUAD_REL_TOL),
                abs_tol=data.get('quad_abs_tol', settings.HTTOOL_QUAD_ABS_TOL),
                max_subdivisions=data.get('quad_max_subdivisions', settings.HTTOOL_QUAD_MAX_SUBDIVISIONS),
            )
        except DjangoValidationError as e:
            raise serializers.ValidationError(detalle_de(e))

        secciones = {}
        for nombre, opciones in data.get('options', {}).items():
            diagnostico = nombre.split('.', 1)[-1]
            if diagnostico not in data['diagnostics']:
                raise serializers.ValidationError({
                    'options': f'La sección [{nombre}] no corresponde a ningún diagnóstico pedido'
                })
            secciones[diagnostico] = dict(opciones)

        data['family_spec'] = especificacion
        data['quad'] = quad
        data['options'] = secciones
        return data

    def create(self, validated_data):
        """Construir el ScenarioConfig inmutable; HTTOOL_OUTPUT_DIR del entorno manda"""
        salida = (
            config('HTTOOL_OUTPUT_DIR', default=None)
            or validated_data.get('output_dir')
            or settings.HTTOOL_OUTPUT_DIR
        )
        return ScenarioConfig(
            family=validated_data['family_spec'],
            alpha=validated_data['alpha'],
            theta=validated_data.get('theta'),
            diagnostics=validated_data['diagnostics'],
            grid=validated_data['grid'],
            ratio_rel=validated_data.get('ratio_rel', settings.HTTOOL_RATIO_REL_TOL),
            quad=validated_data['quad'],
            output_dir=str(salida),
            seed=validated_data['seed'],
            options=validated_data['options'],
        )


class FilaDiagnosticoSerializer(serializers.Serializer):
    """Fila del esquema CSV x,value,theoretical_limit,rel_error"""
    x = serializers.FloatField()
    value = serializers.FloatField()
    theoretical_limit = serializers.FloatField()
    rel_error = serializers.FloatField()


class DiagnosticReportSerializer(serializers.Serializer):
    """Representación de un DiagnosticReport para el resumen y los CSV"""
    id = serializers.CharField()
    alpha = serializers.FloatField(allow_null=True)
    theta = serializers.FloatField(allow_null=True)
    theoretical_limit = serializers.FloatField()
    final_rel_error = serializers.FloatField()
    converged = serializers.BooleanField()
    monotone_tail_of_errors = serializers.BooleanField()
    notes = serializers.ListField(child=serializers.CharField())
    rows = serializers.SerializerMethodField()

    def get_rows(self, obj):
        """Filas del CSV en el orden de la rejilla"""
        filas = [
            {'x': x, 'value': valor, 'theoretical_limit': limite, 'rel_error': error}
            for x, valor, limite, error in obj.rows()
        ]
        return FilaDiagnosticoSerializer(filas, many=True).data
