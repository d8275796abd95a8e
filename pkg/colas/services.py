"""
Servicios de escenario de httool
Orquestan modelos, transformadas, diagnósticos y muestreo detrás de los
comandos `run` y `estimate`, y escriben los CSV y summary.txt
"""
import configparser
import csv
import logging
import math
import time
from pathlib import Path

import numpy as np
from django.conf import settings

from .asymptotics import DiagnosticoService, expected_indices, quantity_evaluator
from .dist_models import DistribucionService
from .exceptions import DivergenceError, EvaluationError, InputError, PreconditionError, UnderflowError
from .models import (
    DIAGNOSTIC_ITEMS, FamilySpec, GridSpec, RunSummary, TransformKind, TransformParams,
)
from .sampling import MuestreoService
from .serializers import DiagnosticReportSerializer, ScenarioConfigSerializer

logger = logging.getLogger(__name__)

CABECERA = ('x', 'value', 'theoretical_limit', 'rel_error')
CABECERA_ESTIMACION = ('x', 'h_slope', 'w_slope', 'warning')
SECCION_PRINCIPAL = 'scenario'
# Fallos numéricos que invalidan un diagnóstico sin abortar el escenario
FALLOS_NUMERICOS = (UnderflowError, EvaluationError, DivergenceError)


def _formato(valor):
    if isinstance(valor, (float, int, np.floating, np.integer)) and not isinstance(valor, bool):
        return repr(float(valor))
    return '' if valor is None else str(valor)


def escribir_csv(ruta, filas, cabecera=CABECERA):
    """Escribir filas (diccionarios) con punto decimal y floats en repr"""
    with open(ruta, 'w', newline='', encoding='utf-8') as fichero:
        writer = csv.DictWriter(fichero, fieldnames=cabecera, lineterminator='\n')
        writer.writeheader()
        for fila in filas:
            writer.writerow({campo: _formato(fila.get(campo)) for campo in cabecera})
    return str(ruta)


def _lista(texto, tipo=float):
    return [tipo(parte.strip()) for parte in str(texto).split(',') if parte.strip()]


class EscenarioService:
    """Servicios para ejecutar escenarios y estimaciones desde datos"""

    @staticmethod
    def load_config(path):
        """
        Leer un fichero de escenario `clave = valor` con secciones [diagnostic.<id>]

        Returns:
            dict: datos listos para ScenarioConfigSerializer

        Raises:
            InputError: fichero ilegible o mal formado
        """
        try:
            texto = Path(path).read_text(encoding='utf-8')
        except (OSError, UnicodeDecodeError) as e:
            raise InputError({'config': f'No se puede leer {path}: {e}'})

        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'))
        # Las opciones de [diagnostic.<id>] distinguen mayúsculas (L, t_values)
        parser.optionxform = str
        try:
            parser.read_string(f'[{SECCION_PRINCIPAL}]\n{texto}', source=str(path))
        except configparser.Error as e:
            raise InputError({'config': f'Formato inválido en {path}: {e}'})

        datos = dict(parser[SECCION_PRINCIPAL])
        opciones = {}
        for seccion in parser.sections():
            if seccion == SECCION_PRINCIPAL:
                continue
            if not seccion.startswith('diagnostic.'):
                raise InputError({'config': f'Sección desconocida [{seccion}]: se esperaba [diagnostic.<id>]'})
            opciones[seccion] = dict(parser[seccion])
        datos['options'] = opciones
        return datos

    @staticmethod
    def build_config(path, require_diagnostics=True):
        """
        Leer y validar un escenario

        `httool transform` solo necesita el modelo y α: no exige diagnósticos.

        Raises:
            InputError: fichero ilegible
            rest_framework.exceptions.ValidationError: configuración inválida (se nombra el campo)
        """
        serializer = ScenarioConfigSerializer(
            data=EscenarioService.load_config(path), context={'require_diagnostics': require_diagnostics},
        )
        serializer.is_valid(raise_exception=True)
        return serializer.save()

    @staticmethod
    def run_scenario(config):
        """
        Ejecutar todos los diagnósticos de un escenario

        Escribe un CSV por diagnóstico y summary.txt en config.output_dir,
        también cuando algún diagnóstico no converge.

        Args:
            config (ScenarioConfig): escenario validado

        Returns:
            RunSummary: veredictos, errores finales y ficheros escritos

        Raises:
            DomainError, PreconditionError, CapabilityError: escenario no aplicable
            OSError: no se puede escribir en output_dir
        """
        inicio = time.perf_counter()
        salida = Path(config.output_dir)
        salida.mkdir(parents=True, exist_ok=True)

        modelo = DistribucionService.make_model(config.family)
        p = TransformParams(config.alpha, config.quad)
        rejilla = config.grid.points()
        resumen = RunSummary()
        logger.info('Escenario %s α=%g θ=%s rejilla %s', modelo.name, config.alpha, config.theta, config.grid)

        for diagnostico in config.diagnostics:
            try:
                informes = EscenarioService._ejecutar(diagnostico, modelo, p, config, rejilla)
            except FALLOS_NUMERICOS as e:
                mensaje = f'{diagnostico}: {" ".join(e.messages)}'
                logger.warning('Diagnóstico fallido %s', mensaje)
                resumen.messages.append(mensaje)
                resumen.record(diagnostico, False, math.nan)
                continue

            for nombre, convergio, error_final, filas, notas in informes:
                ruta = escribir_csv(salida / f'{nombre}.csv', filas)
                resumen.files_written.append(ruta)
                resumen.record(nombre, convergio, error_final)
                resumen.messages.extend(f'{nombre}: {nota}' for nota in notas)
                if not convergio:
                    logger.warning('%s no converge: error final %.3e', nombre, error_final)

        resumen.wall_time = time.perf_counter() - inicio
        resumen.files_written.append(EscenarioService.write_summary(salida / 'summary.txt', modelo, config, resumen))
        return resumen

    @staticmethod
    def _ejecutar(diagnostico, modelo, p, config, rejilla):
        """Lista de (nombre, convergio, error_final, filas, notas) de un diagnóstico"""
        opciones = config.section(diagnostico)

        if diagnostico in DIAGNOSTIC_ITEMS:
            informe = DiagnosticoService.ratio_diagnostic(
                modelo, p, config.theta, diagnostico, rejilla, config.ratio_rel,
            )
            return [EscenarioService._desde_informe(informe)]

        if diagnostico == 'corollary':
            return [
                EscenarioService._desde_informe(informe)
                for informe in DiagnosticoService.corollary_limits(modelo, p, rejilla, config.ratio_rel)
                if informe is not None
            ]

        if diagnostico == 'rv':
            t = float(opciones.get('t', 2.0))
            return [
                EscenarioService._desde_informe(
                    DiagnosticoService.rv_diagnostic(modelo, p, config.theta, cantidad, rejilla, t)
                )
                for cantidad in expected_indices(p.alpha, config.theta)
            ]

        if diagnostico == 'karamata':
            cantidad = opciones.get('quantity', TransformKind.W)
            if 'rho' in opciones:
                rho = float(opciones['rho'])
            elif config.theta is not None:
                indices = expected_indices(p.alpha, config.theta)
                if cantidad not in indices:
                    raise PreconditionError({'quantity': f'{cantidad} no tiene índice esperado; indicar rho'})
                rho = indices[cantidad]
            else:
                raise PreconditionError({'rho': 'karamata requiere rho o theta'})
            informe = DiagnosticoService.karamata_check(
                quantity_evaluator(modelo, p, cantidad), rho, rejilla, p.quad, modelo.breakpoints, config.ratio_rel,
            )
            nombre, convergio, error_final, filas, notas = EscenarioService._desde_informe(informe)
            return [('karamata', convergio, error_final, filas, [f'U = {cantidad}', *notas])]

        if diagnostico == 'dehaan':
            return [EscenarioService._dehaan(modelo, p, opciones, rejilla)]

        if diagnostico == 'montecarlo':
            return [EscenarioService._montecarlo(modelo, p, opciones, config.seed)]

        raise PreconditionError({'diagnostics': f'Diagnóstico desconocido: {diagnostico}'})

    @staticmethod
    def _desde_informe(informe):
        datos = DiagnosticReportSerializer(informe).data
        return informe.id, informe.converged, informe.final_rel_error, datos['rows'], informe.notes

    @staticmethod
    def _dehaan(modelo, p, opciones, rejilla):
        objetivo = opciones.get('target', 'H')
        comprobacion = DiagnosticoService.de_haan_check(
            modelo, p, objetivo, opciones.get('L', 'constant_one'), rejilla,
            _lista(opciones.get('t_values', '2,4,8')),
        )
        factor = 1.0 if objetivo == 'W' else p.alpha
        esperado = factor * comprobacion.lambda_hat
        filas = [
            {'x': x, 'value': beta, 'theoretical_limit': esperado, 'rel_error': abs(beta - esperado)}
            for x, beta in zip(comprobacion.grid, comprobacion.per_x_beta)
        ]
        convergio = comprobacion.relation_residual < settings.HTTOOL_DEHAAN_TOL
        notas = [f'β̂ = {comprobacion.beta_hat!r}, λ̂ = {comprobacion.lambda_hat!r}, objetivo {objetivo}']
        return 'dehaan', convergio, comprobacion.relation_residual, filas, notas

    @staticmethod
    def _montecarlo(modelo, p, opciones, semilla):
        n = int(opciones.get('n', 10_000))
        semillas = _lista(opciones['seeds'], int) if 'seeds' in opciones else [semilla, semilla + 1, semilla + 2]
        comprobacion = MuestreoService.representation_check(modelo, p, n, semillas)
        critico = comprobacion.critical_value
        filas = [
            {'x': s, 'value': d, 'theoretical_limit': critico, 'rel_error': d / critico}
            for s, d in zip(comprobacion.seeds, comprobacion.statistics)
        ]
        notas = [f'{comprobacion.passes} de {len(semillas)} semillas bajo el valor crítico']
        return 'montecarlo', comprobacion.passed, max(comprobacion.statistics) / critico, filas, notas

    @staticmethod
    def write_summary(ruta, modelo, config, resumen):
        """Escribir summary.txt legible con veredictos y ficheros"""
        lineas = [
            f'modelo: {modelo.name}',
            f'alpha: {config.alpha!r}',
            f'theta: {config.theta!r}',
            f'rejilla: {config.grid}',
            '',
        ]
        for nombre, convergio in resumen.verdicts.items():
            estado = 'CONVERGE' if convergio else 'NO CONVERGE'
            lineas.append(f'{nombre:<14} {estado:<12} error final {resumen.final_errors[nombre]:.6e}')
        lineas.append('')
        lineas.extend(resumen.messages)
        lineas.append(f'tiempo: {resumen.wall_time:.3f} s')
        lineas.append(f'código de salida: {resumen.exit_code}')
        Path(ruta).write_text('\n'.join(lineas) + '\n', encoding='utf-8')
        return str(ruta)

    @staticmethod
    def estimate_from_data(samples_path, alpha, t, grid_spec=None, output_dir=None):
        """
        Pendientes de variación regular de H_α y W_α empíricos

        Las transformadas empíricas son sumas finitas exactas, sin cuadratura.
        Los puntos con t·x por encima de la mayor muestra se marcan con un
        aviso en lugar de fallar.

        Returns:
            RunSummary: con estimate.csv en files_written y los índices en messages

        Raises:
            InputError: fichero de muestras inválido (se nombra la línea)
            DomainError: α ≤ 0 o t ≤ 1
        """
        inicio = time.perf_counter()
        p = TransformParams(float(alpha))
        t = float(t)
        if not t > 1:
            raise PreconditionError({'t': 't debe ser mayor que 1'})
        rejilla = (grid_spec or GridSpec()).points()
        modelo = DistribucionService.make_model(FamilySpec('empirical', {'samples_path': samples_path}))
        maximo = float(modelo.samples[-1])

        h = modelo.closed_form(TransformKind.H, p.alpha)
        w = modelo.closed_form(TransformKind.W, p.alpha)
        validos = (h(rejilla) > 0) & (w(rejilla) > 0)
        pendientes = {}
        for nombre, evaluador in (('h_slope', h), ('w_slope', w)):
            columna = np.full(rejilla.size, math.nan)
            if validos.any():
                estimacion = DiagnosticoService.rv_index_estimate(evaluador, rejilla[validos], t)
                columna[validos] = [pendiente for _, pendiente in estimacion.per_scale_slopes]
            pendientes[nombre] = columna

        filas = []
        for k, x in enumerate(rejilla):
            aviso = ''
            if not validos[k]:
                aviso = 'nonpositive'
            elif t * x > maximo:
                aviso = 'beyond_max_sample'
            filas.append({'x': x, 'h_slope': pendientes['h_slope'][k], 'w_slope': pendientes['w_slope'][k], 'warning': aviso})
        avisos = sum(1 for fila in filas if fila['warning'])
        if avisos:
            logger.warning('%d puntos de la rejilla fuera del rango de las muestras (máximo %g)', avisos, maximo)

        resumen = RunSummary()
        limpias = [fila for fila in filas if not fila['warning']]
        referencia = limpias[-1] if limpias else None
        if referencia is None:
            resumen.messages.append('ningún punto de la rejilla queda dentro del rango de las muestras')
        else:
            resumen.messages.append(f'índice de H_α ≈ {referencia["h_slope"]:.6g} (x = {referencia["x"]:g})')
            resumen.messages.append(f'índice de W_α ≈ {referencia["w_slope"]:.6g} (x = {referencia["x"]:g})')
        resumen.record('estimate', referencia is not None, 0.0)

        salida = Path(output_dir or settings.HTTOOL_OUTPUT_DIR)
        salida.mkdir(parents=True, exist_ok=True)
        resumen.files_written.append(escribir_csv(salida / 'estimate.csv', filas, CABECERA_ESTIMACION))
        resumen.wall_time = time.perf_counter() - inicio
        return resumen
