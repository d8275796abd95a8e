"""
Transformadas de una distribución en [0,∞)
H_α, W_α, W̄_α, G_α, Ḡ_α, G′_α, G″_α, el momento m(α) y las fórmulas de
inversión que recuperan F̄ a partir de H_α y F a partir de G_α
"""
import logging
import math

import numpy as np

from .exceptions import CapabilityError, DivergenceError, DomainError, PreconditionError
from .models import ExtendedReal, TransformKind
from .quadrature import CuadraturaService

logger = logging.getLogger(__name__)

# Paso relativo óptimo de la diferencia central
PASO_RELATIVO = float(np.cbrt(np.finfo(float).eps))
# Holgura de la pista de decaimiento cuando H_α crece (m(α) = ∞)
HOLGURA_PISTA = 0.05


def _integrando_w(model, alpha):
    def integrando(y):
        y = np.asarray(y, dtype=float)
        return y ** (alpha - 1.0) * model.tail(y)
    return integrando


def _integrando_g(model, alpha):
    def integrando(y):
        y = np.asarray(y, dtype=float)
        return y ** (alpha - 1.0) * model.cdf(y)
    return integrando


def _puntos(xs):
    x = np.atleast_1d(np.asarray(xs, dtype=float)).ravel()
    if np.any(~np.isfinite(x)) or np.any(x < 0):
        raise PreconditionError({'x': 'Los puntos deben ser reales finitos y no negativos'})
    return x


def _comprobar_finitud(model, alpha):
    """W_α(∞) < ∞ salvo que el umbral de divergencia diga lo contrario"""
    umbral = model.moment_divergence_threshold
    if umbral is not None and alpha >= umbral:
        raise DivergenceError(f'W_α(∞) = ∞ para α={alpha:g} ≥ β*={umbral:g} en {model.name}')


def _pista_cola(model, alpha):
    """Exponente p con y^{α−1}F̄(y) = O(y^{−p}) cuando la cola es potencial exacta"""
    if model.tail_index is None or model.tail_index <= alpha:
        return None
    return model.tail_index - alpha + 1.0


def _pista_inversion(model, alpha):
    """Exponente p con z^{−α−1}H_α(z) = O(z^{−p})"""
    umbral = model.moment_divergence_threshold
    if umbral is None or umbral > alpha:
        return alpha + 1.0
    return 1.0 + umbral - min(HOLGURA_PISTA, 0.5 * umbral)


def _ancla(model):
    return max(1.0, float(model.breakpoints[-1])) if len(model.breakpoints) else 1.0


def _acumulada(integrando, x, model, cfg):
    """∫₀ˣ para cada punto; 0 en x = 0"""
    valores = np.zeros_like(x)
    errores = np.zeros_like(x)
    convergio = True
    positivos = x > 0
    if positivos.any():
        v, e, convergio = CuadraturaService.cumulative_integral(
            integrando, x[positivos], 0.0, model.breakpoints, cfg,
        )
        valores[positivos] = v
        errores[positivos] = e
    return valores, errores, convergio


def _wbar(model, alpha, x, cfg):
    """
    W̄_α en todos los puntos: cola desde el mayor punto y sumas hacia atrás
    entre puntos consecutivos, sin restar W_α(∞) − W_α(x)
    """
    _comprobar_finitud(model, alpha)
    integrando = _integrando_w(model, alpha)
    positivos = x[x > 0]
    ordenados = np.unique(positivos) if positivos.size else np.array([_ancla(model)])

    cola = CuadraturaService.integrate_tail(
        integrando, ordenados[-1], cfg, decay=_pista_cola(model, alpha), breakpoints=model.breakpoints,
    )
    piezas, errores_piezas, convergio = CuadraturaService.panel_integrals(
        integrando, ordenados, model.breakpoints, cfg,
    )
    restos = np.concatenate([np.cumsum(piezas[::-1])[::-1], [0.0]]) + cola.value
    restos_err = np.concatenate([np.cumsum(errores_piezas[::-1])[::-1], [0.0]]) + cola.abs_error_estimate

    valores = np.empty_like(x)
    errores = np.empty_like(x)
    indices = np.searchsorted(ordenados, x[x > 0])
    valores[x > 0] = restos[indices]
    errores[x > 0] = restos_err[indices]
    if np.any(x == 0):
        inicio = CuadraturaService.integrate_finite(integrando, 0.0, ordenados[0], model.breakpoints, cfg)
        valores[x == 0] = inicio.value + restos[0]
        errores[x == 0] = inicio.abs_error_estimate + restos_err[0]
        convergio = convergio and inicio.converged
    return valores, errores, convergio and cola.converged


def _h_desde(model, alpha, ancla, w_ancla, cfg):
    """H_α(z) para z ≥ ancla integrando W_α desde el ancla ya conocida"""
    integrando = _integrando_w(model, alpha)

    def h(z):
        z = np.asarray(z, dtype=float)
        planos = z.ravel()
        w, _, _ = CuadraturaService.cumulative_integral(integrando, planos, ancla, model.breakpoints, cfg)
        return (alpha * (w_ancla + w) - planos ** alpha * model.tail(planos)).reshape(z.shape)
    return h


class TransformService:
    """Evaluación de transformadas, momento e inversiones exactas"""

    @staticmethod
    def evaluate_grid(model, kind, p, xs, full_output=False):
        """
        Evaluar una transformada en muchos puntos con una sola pasada acumulada

        Args:
            model (DistributionModel): distribución
            kind (str): un valor de TransformKind
            p (TransformParams): α y configuración de cuadratura
            xs (array_like): puntos ≥ 0 en cualquier orden
            full_output (bool): devolver también errores estimados y convergencia

        Returns:
            ndarray o tuple: valores en el orden de entrada, o
            (valores, errores, convergio) con full_output

        Raises:
            DivergenceError: Wbar con W_α(∞) = ∞
            CapabilityError: Gsecond sin densidad
            PreconditionError: Gprime o Gsecond en x = 0
        """
        if kind not in TransformKind.values:
            raise DomainError({'kind': f'Transformada desconocida: {kind}'})
        alpha, cfg = p.alpha, p.quad
        x = _puntos(xs)

        if kind == TransformKind.GSECOND and not model.has_density:
            raise CapabilityError(f'G″_α requiere la densidad y {model.name} no la ofrece')
        if kind in (TransformKind.GPRIME, TransformKind.GSECOND) and np.any(x == 0):
            raise PreconditionError({'x': f'{kind} solo se evalúa en x > 0'})

        if kind == TransformKind.WBAR:
            valores, errores, convergio = _wbar(model, alpha, x, cfg)
        elif kind == TransformKind.G:
            phi, errores, convergio = _acumulada(_integrando_g(model, alpha), x, model, cfg)
            escala = np.where(x > 0, alpha * np.where(x > 0, x, 1.0) ** -alpha, 0.0)
            valores, errores = escala * phi, escala * errores
        else:
            w, errores, convergio = _acumulada(_integrando_w(model, alpha), x, model, cfg)
            if kind == TransformKind.W:
                valores = w
            elif kind == TransformKind.GBAR:
                escala = alpha * np.where(x > 0, x, 1.0) ** -alpha
                valores = np.where(x > 0, escala * w, 1.0)
                errores = np.where(x > 0, escala * errores, 0.0)
            else:
                valores = alpha * w - x ** alpha * model.tail(x)
                errores = alpha * errores
                if kind in (TransformKind.GPRIME, TransformKind.GSECOND):
                    escala = alpha * x ** (-alpha - 1.0)
                    valores, errores = escala * valores, escala * errores
                if kind == TransformKind.GSECOND:
                    valores = (alpha * model.density(x) - (alpha + 1.0) * valores) / x
                    errores = (alpha + 1.0) * errores / x

        valores = np.asarray(valores, dtype=float)
        if not convergio:
            logger.warning('%s de %s con α=%g: cuadratura sin convergencia', kind, model.name, alpha)
        if full_output:
            return valores, np.asarray(errores, dtype=float), convergio
        return valores

    @staticmethod
    def evaluate_transform(model, kind, p, x):
        """
        Valor de una transformada en un punto x ≥ 0

        En x = 0 se devuelve el límite por continuidad: 0 para H, W y G,
        1 para Gbar y W_α(∞) para Wbar.
        """
        return float(TransformService.evaluate_grid(model, kind, p, [x])[0])

    @staticmethod
    def evaluator(model, kind, p):
        """Callable vectorizado x -> transformada que conserva la forma de la entrada"""
        def evaluar(xs):
            valores = TransformService.evaluate_grid(model, kind, p, np.ravel(xs))
            return valores.reshape(np.shape(xs)) if np.ndim(xs) else float(valores[0])
        return evaluar

    @staticmethod
    def moment(model, p):
        """
        m(α) = αW_α(∞)

        Returns:
            ExtendedReal: +∞ si α ≥ β* o si la integral de cola no converge
        """
        alpha, cfg = p.alpha, p.quad
        umbral = model.moment_divergence_threshold
        if umbral is not None and alpha >= umbral:
            return ExtendedReal.infinite()

        integrando = _integrando_w(model, alpha)
        ancla = _ancla(model)
        try:
            cuerpo = CuadraturaService.integrate_finite(integrando, 0.0, ancla, model.breakpoints, cfg)
            cola = CuadraturaService.integrate_tail(
                integrando, ancla, cfg, decay=_pista_cola(model, alpha), breakpoints=model.breakpoints,
            )
        except DivergenceError:
            logger.info('m(%g) = ∞ para %s', alpha, model.name)
            return ExtendedReal.infinite()

        total = alpha * (cuerpo.value + cola.value)
        if not math.isfinite(total):
            return ExtendedReal.infinite()
        return ExtendedReal(total)

    @staticmethod
    def invert_tail_from_H(model, p, x):
        """
        F̄(x) = α∫ₓ^∞ z^{−α−1}H_α(z)dz − x^{−α}H_α(x)

        H_α dentro de la integral se obtiene acumulando W_α desde x.
        """
        alpha, cfg = p.alpha, p.quad
        x = float(x)
        if not x > 0:
            raise PreconditionError({'x': 'La inversión se evalúa en x > 0'})

        w_x = TransformService.evaluate_transform(model, TransformKind.W, p, x)
        h_x = alpha * w_x - x ** alpha * float(model.tail(x))
        h = _h_desde(model, alpha, x, w_x, cfg)

        def integrando(z):
            z = np.asarray(z, dtype=float)
            return z ** (-alpha - 1.0) * h(z)

        integral = CuadraturaService.integrate_tail(
            integrando, x, cfg, decay=_pista_inversion(model, alpha), breakpoints=model.breakpoints,
        )
        return alpha * integral.value - x ** -alpha * h_x

    @staticmethod
    def invert_tail_from_moment_gap(model, p, x):
        """
        F̄(x) = x^{−α}(m(α) − H_α(x)) − α∫ₓ^∞ z^{−α−1}(m(α) − H_α(z))dz

        Raises:
            PreconditionError: si m(α) = ∞
        """
        alpha, cfg = p.alpha, p.quad
        x = float(x)
        if not x > 0:
            raise PreconditionError({'x': 'La inversión se evalúa en x > 0'})
        m = TransformService.moment(model, p)
        if not m.is_finite:
            raise PreconditionError(f'La inversión por m(α) − H_α requiere m({alpha:g}) < ∞')
        m = float(m)

        w_x = TransformService.evaluate_transform(model, TransformKind.W, p, x)
        h_x = alpha * w_x - x ** alpha * float(model.tail(x))
        h = _h_desde(model, alpha, x, w_x, cfg)

        def integrando(z):
            z = np.asarray(z, dtype=float)
            return z ** (-alpha - 1.0) * (m - h(z))

        integral = CuadraturaService.integrate_tail(
            integrando, x, cfg, decay=alpha + 1.0, breakpoints=model.breakpoints,
        )
        return x ** -alpha * (m - h_x) - alpha * integral.value

    @staticmethod
    def central_difference_gprime(model, p, x):
        """
        G′_α(x) por diferencia central con paso h = x·∛ε

        G_α(x ± h) se escribe como G_α(x) más incrementos integrados sobre
        [x−h, x] y [x, x+h], de modo que la resta no pierde cifras.

        Raises:
            PreconditionError: si hay un punto de ruptura a menos de h de x
        """
        alpha, cfg = p.alpha, p.quad
        x = float(x)
        if not x > 0:
            raise PreconditionError({'x': 'La derivada se evalúa en x > 0'})
        e = PASO_RELATIVO
        h = x * e
        for ruptura in model.breakpoints:
            if abs(ruptura - x) <= h:
                raise PreconditionError(
                    f'x={x!r} está a menos de h={h:.3e} del punto de ruptura {ruptura!r}: '
                    'usar la identidad exacta G′_α = αx^{−α−1}H_α'
                )

        integrando = _integrando_g(model, alpha)
        phi = CuadraturaService.integrate_finite(integrando, 0.0, x, model.breakpoints, cfg).value
        arriba = CuadraturaService.integrate_finite(integrando, x, x + h, (), cfg).value
        abajo = CuadraturaService.integrate_finite(integrando, x - h, x, (), cfg).value

        base = x ** -alpha
        coef_arriba = base * math.exp(-alpha * math.log1p(e))
        coef_abajo = base * math.exp(-alpha * math.log1p(-e))
        diferencia_coef = base * (math.expm1(-alpha * math.log1p(e)) - math.expm1(-alpha * math.log1p(-e)))
        incremento = alpha * (phi * diferencia_coef + coef_arriba * arriba + coef_abajo * abajo)
        return incremento / (2.0 * h)

    @staticmethod
    def invert_F_from_G(model, p, x):
        """
        F(x) = G_α(x) + (x/α)G′_α(x) con G′_α por diferencia central

        Raises:
            PreconditionError: si x está a menos de h de un punto de ruptura
        """
        alpha = p.alpha
        gprima = TransformService.central_difference_gprime(model, p, x)
        g = TransformService.evaluate_transform(model, TransformKind.G, p, x)
        return g + float(x) / alpha * gprima

    @staticmethod
    def closed_form(model, kind, alpha, x=None):
        """
        Valor exacto de la tabla de formas cerradas del modelo

        kind admite los valores de TransformKind y 'moment' (x se ignora).

        Raises:
            CapabilityError: si el modelo no tiene forma cerrada para (kind, α)
            DivergenceError: Wbar con W_α(∞) = ∞
        """
        if kind == 'moment':
            valor = model.closed_form(kind, alpha)
            if valor is None:
                raise CapabilityError(f'{model.name} no tiene m(α) en forma cerrada')
            return ExtendedReal(float(valor))

        evaluador = model.closed_form(kind, alpha)
        if evaluador is None:
            if kind == TransformKind.WBAR and kind in model.closed_forms:
                raise DivergenceError(f'W_α(∞) = ∞ para α={alpha:g} en {model.name}')
            raise CapabilityError(f'{model.name} no tiene forma cerrada para {kind}')
        valores = np.asarray(evaluador(x), dtype=float)
        return float(valores) if valores.ndim == 0 else valores
