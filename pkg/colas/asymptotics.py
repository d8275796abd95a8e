"""
Diagnósticos numéricos de los límites asintóticos
Cocientes de transformadas sobre una rejilla creciente, índices de variación
regular, caracterizaciones de Karamata, clases de de Haan y los límites de
las derivadas de G_α cuando m(α) < ∞
"""
import logging
import math

import numpy as np
from django.conf import settings

from .exceptions import (
    CapabilityError, DivergenceError, DomainError, PreconditionError, UnderflowError,
)
from .models import (
    DIAGNOSTIC_ITEMS, DeHaanCheck, DiagnosticItem, DiagnosticReport, NormalizadorL,
    ObjetivoDeHaan, QuadratureConfig, RVEstimate, TransformKind,
)
from .quadrature import CuadraturaService
from .transforms import TransformService

logger = logging.getLogger(__name__)

ITEMS_T1 = ('T1d', 'T1f', 'T1g', 'T1h')
ITEMS_T2 = ('T2d', 'T2e', 'T2g')


def _rejilla(grid):
    x = np.asarray(grid, dtype=float).ravel()
    if x.size == 0 or np.any(~np.isfinite(x)) or np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise PreconditionError({'grid': 'La rejilla debe ser no vacía, positiva y estrictamente creciente'})
    return x


def _resolver(item):
    if isinstance(item, DiagnosticItem):
        return item
    try:
        return DIAGNOSTIC_ITEMS[item]
    except KeyError:
        raise DomainError({'item': f'Diagnóstico desconocido: {item}'})


def _dividir(numerador, denominador, x):
    """Cociente elemento a elemento; denominadores subnormales son un error"""
    umbral = settings.HTTOOL_UNDERFLOW
    pequenos = np.abs(denominador) < umbral
    if pequenos.any():
        punto = float(x[np.argmax(pequenos)])
        raise UnderflowError(f'Denominador por debajo de {umbral:g} en x={punto!r}', x=punto)
    return numerador / denominador


def errores_relativos(valores, limite):
    """Error absoluto si el límite es 0, relativo en otro caso"""
    valores = np.asarray(valores, dtype=float)
    if limite == 0:
        return np.abs(valores)
    return np.abs(valores - limite) / abs(limite)


def veredicto(errores, tolerancia):
    """
    (convergio, monotono): error final bajo la tolerancia y los últimos K
    errores no crecientes salvo el ruido de redondeo
    """
    errores = np.asarray(errores, dtype=float)
    ventana = errores[-settings.HTTOOL_MONOTONE_WINDOW:]
    monotono = bool(np.all(np.isfinite(ventana)) and np.all(np.diff(ventana) <= settings.HTTOOL_NOISE_FLOOR))
    final = float(errores[-1])
    return bool(math.isfinite(final) and final < tolerancia and monotono), monotono


def _tolerancia(limite, tol):
    if limite == 0:
        return settings.HTTOOL_ZERO_LIMIT_ABS_TOL
    return settings.HTTOOL_RATIO_REL_TOL if tol is None else tol


def _informe(item, alpha, theta, x, ratios, limite, tol, notes=None, auxiliary=None):
    ratios = np.asarray(ratios, dtype=float)
    errores = errores_relativos(ratios, limite)
    convergio, monotono = veredicto(errores, _tolerancia(limite, tol))
    informe = DiagnosticReport(
        item=item,
        alpha=alpha,
        theta=theta,
        grid=[float(v) for v in x],
        ratios=[float(v) for v in ratios],
        theoretical_limit=float(limite),
        rel_errors=[float(v) for v in errores],
        final_rel_error=float(errores[-1]),
        converged=convergio,
        monotone_tail_of_errors=monotono,
        notes=list(notes or []),
        auxiliary=dict(auxiliary or {}),
    )
    logger.info('%s: error final %.3e, convergencia %s', item.id, informe.final_rel_error, convergio)
    return informe


def _momento_finito(model, p):
    m = TransformService.moment(model, p)
    if not m.is_finite:
        raise PreconditionError(f'Se requiere m({p.alpha:g}) < ∞ y en {model.name} es +∞')
    return float(m)


def _comprobar_regimen(item, alpha, theta):
    if item.regime == 'K':
        raise PreconditionError(f'{item.id} se evalúa con karamata_check')
    if item.regime == 'C':
        return
    if theta is None:
        raise PreconditionError({'theta': f'{item.id} requiere theta'})
    if item.id in ITEMS_T1:
        if not 0 <= theta <= alpha:
            raise PreconditionError({'theta': f'{item.id} requiere 0 ≤ θ ≤ α'})
        if theta == alpha and item.id != 'T1d':
            # En θ = α solo se afirma la implicación directa hacia (d)
            raise PreconditionError({'theta': f'{item.id} no está definido en θ = α'})
    elif item.id in ITEMS_T2:
        if not theta > alpha:
            raise PreconditionError({'theta': f'{item.id} requiere θ > α'})
    elif item.id == 'D1' and not 0 <= theta < alpha:
        raise PreconditionError({'theta': 'D1 requiere 0 ≤ θ < α'})


def expected_indices(alpha, theta):
    """
    Índices de variación regular que implica cada régimen

    θ ≤ α: F̄, Ḡ_α ∈ RV_{θ−α} y W_α, H_α ∈ RV_θ.
    θ > α: F̄ ∈ RV_{−θ} y W̄_α, m(α) − H_α ∈ RV_{α−θ}.
    """
    if theta <= alpha:
        return {'tail': theta - alpha, 'Gbar': theta - alpha, 'W': theta, 'H': theta}
    return {'tail': -theta, 'Wbar': alpha - theta, 'moment_gap': alpha - theta}


def quantity_evaluator(model, p, cantidad):
    """Callable vectorizado para cada cantidad de expected_indices"""
    alpha = p.alpha
    if cantidad == 'tail':
        return lambda x: model.tail(np.asarray(x, dtype=float))
    if cantidad == 'moment_gap':
        wbar = TransformService.evaluator(model, TransformKind.WBAR, p)

        def brecha(x):
            x = np.asarray(x, dtype=float)
            return alpha * wbar(x) + x ** alpha * model.tail(x)
        return brecha
    if cantidad not in TransformKind.values:
        raise DomainError({'quantity': f'Cantidad desconocida: {cantidad}'})
    return TransformService.evaluator(model, cantidad, p)


class DiagnosticoService:
    """Verificación numérica de límites y de variación regular"""

    @staticmethod
    def ratio_diagnostic(model, p, theta, item, grid, tol=None):
        """
        Cociente de un diagnóstico sobre la rejilla frente a su límite teórico

        Args:
            model (DistributionModel): distribución
            p (TransformParams): α y cuadratura
            theta (float): índice declarado (None solo para los corolarios)
            item (DiagnosticItem o str): T1d..T2g, C1..C3 o D1
            grid (sequence): puntos positivos estrictamente crecientes
            tol (float): tolerancia relativa; por defecto HTTOOL_RATIO_REL_TOL

        Returns:
            DiagnosticReport

        Raises:
            PreconditionError: régimen de θ incompatible o m(α) = ∞ donde se requiere
            UnderflowError: denominador por debajo de HTTOOL_UNDERFLOW (se nombra x)
            CapabilityError: C3 sin densidad
        """
        item = _resolver(item)
        alpha = p.alpha
        x = _rejilla(grid)
        _comprobar_regimen(item, alpha, theta)

        m = None
        if item.regime == 'C' or item.id in ITEMS_T2:
            m = _momento_finito(model, p)
        if item.id == 'C3' and not model.has_density:
            raise CapabilityError(f'C3 requiere la densidad y {model.name} no la ofrece')

        notas = []
        cola = np.asarray(model.tail(x), dtype=float) * np.ones_like(x)
        xa_cola = x ** alpha * cola

        if item.id in ITEMS_T2:
            wbar, _, convergio = TransformService.evaluate_grid(model, TransformKind.WBAR, p, x, full_output=True)
            if item.id == 'T2d':
                ratios = _dividir(wbar, xa_cola, x)
            elif item.id == 'T2e':
                # x^{−α}m(α) − Ḡ_α = αx^{−α}W̄_α
                ratios = _dividir(alpha * x ** -alpha * wbar, cola, x)
            else:
                # m(α) − H_α = αW̄_α + x^αF̄
                ratios = _dividir(alpha * wbar + xa_cola, xa_cola, x)
        else:
            w, _, convergio = TransformService.evaluate_grid(model, TransformKind.W, p, x, full_output=True)
            gbar = alpha * x ** -alpha * w
            h = alpha * w - xa_cola
            gprima = alpha * x ** (-alpha - 1.0) * h
            ratios = {
                'T1d': lambda: _dividir(cola, gbar, x),
                'T1f': lambda: _dividir(xa_cola, h, x),
                'T1g': lambda: _dividir(x ** alpha * gbar, h, x),
                'T1h': lambda: _dividir(xa_cola, w, x),
                'C1': lambda: x ** alpha * gbar,
                'C2': lambda: x ** (1.0 + alpha) * gprima,
                'C3': lambda: x ** (1.0 + alpha) * (alpha * model.density(x) - (alpha + 1.0) * gprima),
                'D1': lambda: _dividir(x ** (1.0 + alpha) * gprima, h, x),
            }[item.id]()

        if not convergio:
            notas.append('cuadratura sin convergencia en algún punto de la rejilla')
        if item.id == 'C3':
            notas.append('δ = α en la condición x^{1+δ}f(x) = o(1)')
        limite = item.limit(alpha, theta, m)
        return _informe(item, alpha, theta, x, ratios, limite, tol, notas)

    @staticmethod
    def rv_index_estimate(evaluator, grid, t):
        """
        Pendientes log(f(tx)/f(x))/log t en cada punto de la rejilla

        Raises:
            DomainError: t ≤ 1 o f no positiva en la rejilla o en t·rejilla
        """
        t = float(t)
        if not t > 1:
            raise DomainError({'t': 't debe ser mayor que 1'})
        x = _rejilla(grid)
        valores = np.asarray(evaluator(np.concatenate([x, t * x])), dtype=float)
        no_positivos = ~(valores > 0)
        if no_positivos.any():
            punto = float(np.concatenate([x, t * x])[np.argmax(no_positivos)])
            raise DomainError({'evaluator': f'Valor no positivo en x={punto!r}'})
        f_x, f_tx = valores[:x.size], valores[x.size:]
        pendientes = np.log(f_tx / f_x) / math.log(t)
        return RVEstimate(
            index_hat=float(pendientes[-1]),
            per_scale_slopes=tuple((float(a), float(b)) for a, b in zip(x, pendientes)),
            t=t,
        )

    @staticmethod
    def rv_diagnostic(model, p, theta, cantidad, grid, t=2.0):
        """Pendientes de una cantidad frente a su índice esperado (error absoluto)"""
        esperados = expected_indices(p.alpha, theta)
        if cantidad not in esperados:
            raise PreconditionError({'quantity': f'{cantidad} no tiene índice esperado con θ={theta:g}, α={p.alpha:g}'})
        estimacion = DiagnosticoService.rv_index_estimate(quantity_evaluator(model, p, cantidad), grid, t)
        esperado = esperados[cantidad]
        item = DiagnosticItem(f'rv_{cantidad}', f'índice de {cantidad}', lambda a, th, m=None: esperado, 'RV')
        x = np.array([punto for punto, _ in estimacion.per_scale_slopes])
        pendientes = np.array([pendiente for _, pendiente in estimacion.per_scale_slopes])
        errores = np.abs(pendientes - esperado)
        convergio, monotono = veredicto(errores, settings.HTTOOL_RV_INDEX_TOL)
        return DiagnosticReport(
            item=item,
            alpha=p.alpha,
            theta=theta,
            grid=list(x),
            ratios=list(pendientes),
            theoretical_limit=float(esperado),
            rel_errors=list(errores),
            final_rel_error=float(errores[-1]),
            converged=convergio,
            monotone_tail_of_errors=monotono,
            notes=[f't = {estimacion.t:g}'],
        )

    @staticmethod
    def karamata_check(evaluator, rho, grid, cfg=None, breakpoints=(), tol=None):
        """
        Caracterización de Karamata de U ∈ RV_ρ

        ρ > −1: xU(x)/∫₀ˣU → ρ+1.  ρ < −1: xU(x)/∫ₓ^∞U → −(ρ+1).

        Raises:
            PreconditionError: ρ = −1
            DivergenceError: ∫ₓ^∞U diverge (ρ mal declarado)
        """
        rho = float(rho)
        if rho == -1.0:
            raise PreconditionError({'rho': 'El caso ρ = −1 no tiene caracterización de Karamata'})
        cfg = cfg or QuadratureConfig.from_settings()
        x = _rejilla(grid)

        def integrando(y):
            return np.asarray(evaluator(np.asarray(y, dtype=float)), dtype=float)

        if rho > -1.0:
            item = DIAGNOSTIC_ITEMS['K1']
            integrales, _, convergio = CuadraturaService.cumulative_integral(integrando, x, 0.0, breakpoints, cfg)
        else:
            item = DIAGNOSTIC_ITEMS['K2']
            try:
                cola = CuadraturaService.integrate_tail(integrando, x[-1], cfg, breakpoints=breakpoints)
            except DivergenceError:
                raise DivergenceError(f'∫ₓ^∞U diverge desde x={x[-1]!r}: ¿ρ={rho:g} mal declarado?')
            piezas, _, convergio = CuadraturaService.panel_integrals(integrando, x, breakpoints, cfg)
            integrales = np.concatenate([np.cumsum(piezas[::-1])[::-1], [0.0]]) + cola.value
            convergio = convergio and cola.converged

        ratios = _dividir(x * integrando(x), integrales, x)
        notas = [] if convergio else ['cuadratura sin convergencia en algún punto de la rejilla']
        return _informe(item, None, rho, x, ratios, item.limit(None, rho), tol, notas)

    @staticmethod
    def de_haan_check(model, p, target, L_spec, grid, t_values):
        """
        Incrementos normalizados (f(tx) − f(x))/L(x) de la clase Π_β(L)

        β̂ se ajusta por mínimos cuadrados contra log t en el mayor x, λ̂ es
        x^αF̄(x)/L(x) allí y el residuo es |β̂ − αλ̂| (|β̂ − λ̂| para W).

        Raises:
            DomainError: t ≤ 1, objetivo o normalizador desconocidos, L(x) subdesborda
        """
        if target not in ObjetivoDeHaan.values:
            raise DomainError({'target': f'Objetivo desconocido: {target}'})
        if L_spec not in NormalizadorL.values:
            raise DomainError({'L_spec': f'Normalizador desconocido: {L_spec}'})
        t = np.asarray(t_values, dtype=float).ravel()
        if t.size == 0 or np.any(~(t > 1)):
            raise DomainError({'t_values': 'Todos los t deben ser mayores que 1'})
        alpha = p.alpha
        x = _rejilla(grid)

        puntos = np.concatenate([x, np.outer(x, t).ravel()])
        w = TransformService.evaluate_grid(model, TransformKind.W, p, puntos)
        xa_cola = puntos ** alpha * model.tail(puntos)
        f = {
            ObjetivoDeHaan.GBAR_SCALED: alpha * w,
            ObjetivoDeHaan.H: alpha * w - xa_cola,
            ObjetivoDeHaan.W: w,
        }[target]
        f_x = f[:x.size]
        f_tx = f[x.size:].reshape(x.size, t.size)

        if L_spec == NormalizadorL.AUTO:
            normalizador = xa_cola[:x.size]
        else:
            normalizador = np.ones_like(x)
        pequenos = np.abs(normalizador) < settings.HTTOOL_UNDERFLOW
        if pequenos.any():
            raise DomainError({'L': f'L(x) subdesborda en x={float(x[np.argmax(pequenos)])!r}'})

        incrementos = (f_tx - f_x[:, None]) / normalizador[:, None]
        log_t = np.log(t)
        betas = incrementos @ log_t / (log_t @ log_t)
        beta_hat = float(betas[-1])
        lambda_hat = float(xa_cola[x.size - 1] / normalizador[-1])
        factor = 1.0 if target == ObjetivoDeHaan.W else alpha
        return DeHaanCheck(
            target=target,
            L_spec=L_spec,
            grid=tuple(float(v) for v in x),
            t_values=tuple(float(v) for v in t),
            normalized_increments=incrementos,
            beta_hat=beta_hat,
            lambda_hat=lambda_hat,
            relation_residual=abs(beta_hat - factor * lambda_hat),
            per_x_beta=tuple(float(v) for v in betas),
        )

    @staticmethod
    def corollary_limits(model, p, grid, tol=None):
        """
        Límites con m(α) < ∞: x^αḠ_α → m, x^{1+α}G′_α → αm, x^{2+α}G″_α → −α(α+1)m

        El informe C1 incluye x^αF̄ → 0 en auxiliary y solo converge si ambos
        convergen. C3 es None sin densidad o si x f(x)/F̄(x) supera
        HTTOOL_DENSITY_RATIO_BOUND en la rejilla.

        Returns:
            tuple: (C1, C2, C3 o None)

        Raises:
            PreconditionError: si m(α) = ∞
        """
        _momento_finito(model, p)
        x = _rejilla(grid)
        c1 = DiagnosticoService.ratio_diagnostic(model, p, None, 'C1', x, tol)

        xa_cola = x ** p.alpha * model.tail(x)
        errores_cola = errores_relativos(xa_cola, 0.0)
        cola_convergio, _ = veredicto(errores_cola, settings.HTTOOL_ZERO_LIMIT_ABS_TOL)
        c1.auxiliary['x_alpha_tail'] = [float(v) for v in xa_cola]
        c1.auxiliary['x_alpha_tail_error'] = [float(v) for v in errores_cola]
        if not cola_convergio:
            c1.notes.append('x^αF̄(x) no tiende a 0 en la rejilla')
        c1.converged = c1.converged and cola_convergio

        c2 = DiagnosticoService.ratio_diagnostic(model, p, None, 'C2', x, tol)

        c3 = None
        if model.has_density:
            cola = np.asarray(model.tail(x), dtype=float) * np.ones_like(x)
            densidad = np.asarray(model.density(x), dtype=float) * np.ones_like(x)
            vivos = cola > 0
            cociente = x[vivos] * densidad[vivos] / cola[vivos]
            if cociente.size == 0 or cociente.max() <= settings.HTTOOL_DENSITY_RATIO_BOUND:
                c3 = DiagnosticoService.ratio_diagnostic(model, p, None, 'C3', x, tol)
            else:
                logger.warning(
                    'C3 omitido en %s: x f(x)/F̄(x) alcanza %.3e', model.name, float(cociente.max()),
                )
        else:
            logger.warning('C3 omitido: %s no ofrece densidad', model.name)
        return c1, c2, c3
