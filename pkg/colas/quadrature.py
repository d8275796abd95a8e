"""
Cuadratura adaptativa para httool
Bisección adaptativa con el par Gauss 7 / Kronrod 15 en cada panel, paneles
partidos de antemano en los puntos de ruptura del modelo y tratamiento de
intervalos semi-infinitos por cambio de variable racional
"""
import heapq
import logging
import math

import numpy as np

from .exceptions import DivergenceError, EvaluationError, PreconditionError
from .models import QuadratureConfig, QuadratureResult

logger = logging.getLogger(__name__)

# Nodos y pesos de Gauss-Kronrod (7, 15) en [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODOS = np.concatenate([-_XGK[:7], _XGK[7::-1]])
PESOS_KRONROD = np.concatenate([_WGK[:7], _WGK[7::-1]])
PESOS_GAUSS = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG[:3]):
    PESOS_GAUSS[_i] = _w
    PESOS_GAUSS[14 - _i] = _w
PESOS_GAUSS[7] = _WG[3]

# Duplicaciones máximas del intervalo: 2^1000·a sigue siendo finito
MAX_DUPLICACIONES = 1000
# Sondas para estimar la constante C de integrando = O(z^{-p})
_SONDAS_COLA = 2.0 ** np.arange(0, 41)
# Reparto inicial de intervalos anchos: cociente entre bordes consecutivos
# como mucho 2, salvo que haga falta más de _MAX_PANELES_GEOMETRICOS paneles
_MAX_PANELES_GEOMETRICOS = 128
# Con a = 0 el reparto geométrico empieza en b·2^{-40}
_FONDO_RELATIVO = 2.0 ** -40
# Rupturas en u = 1 − 2^{-k}: el cambio z = a/(1−u) las lleva a z = a·2^k
_RUPTURAS_U = 1.0 - 2.0 ** -np.arange(1, 53)
# Corte mínimo 1 − u_max: más cerca de u = 1 los nodos pierden cifras
_COCIENTE_MINIMO = 2.0 ** -40


def _evaluar_paneles(integrand, a, b):
    """Estimaciones Kronrod y Gauss sobre los paneles [a_i, b_i] en una sola llamada"""
    centro = 0.5 * (a + b)
    mitad = 0.5 * (b - a)
    puntos = centro[:, None] + mitad[:, None] * NODOS[None, :]
    valores = np.asarray(integrand(puntos.ravel()), dtype=float).reshape(puntos.shape)
    nan = np.isnan(valores)
    if nan.any():
        x = float(puntos[nan][0])
        raise EvaluationError(f'El integrando devolvió NaN en x={x!r}', x=x)
    kronrod = mitad * (valores @ PESOS_KRONROD)
    gauss = mitad * (valores @ PESOS_GAUSS)
    return kronrod, np.abs(kronrod - gauss)


def _rupturas_en(breakpoints, a, b):
    """Puntos de ruptura estrictamente dentro de (a, b)"""
    if breakpoints is None or len(breakpoints) == 0:
        return np.empty(0)
    puntos = np.asarray(breakpoints, dtype=float)
    inicio = np.searchsorted(puntos, a, side='right')
    fin = np.searchsorted(puntos, b, side='left')
    return puntos[inicio:fin]


def _bordes_iniciales(a, b, breakpoints):
    """
    Bordes del primer reparto de [a, b]: los puntos de ruptura y, si b/a es
    grande, una sucesión geométrica para que ningún panel abarque varios
    órdenes de magnitud
    """
    bordes = [np.array([a, b]), _rupturas_en(breakpoints, a, b)]
    inferior = a if a > 0 else b * _FONDO_RELATIVO
    cociente = b / inferior if inferior > 0 else 1.0
    if cociente > 2.0:
        n = _MAX_PANELES_GEOMETRICOS
        if math.isfinite(cociente):
            n = min(int(math.ceil(math.log2(cociente))), n)
        bordes.append(np.geomspace(inferior, b, n + 1))
    return np.unique(np.concatenate(bordes))


class CuadraturaService:
    """Integración numérica sobre intervalos finitos y semi-infinitos"""

    @staticmethod
    def integrate_finite(integrand, a, b, breakpoints=(), cfg=None):
        """
        Integrar sobre [a, b] con bisección adaptativa Gauss-Kronrod

        Args:
            integrand (callable): función vectorizada sobre arrays de numpy
            a (float): extremo inferior, 0 ≤ a
            b (float): extremo superior, a ≤ b < ∞
            breakpoints (sequence): puntos ordenados donde se parte de antemano
            cfg (QuadratureConfig): tolerancias; por defecto las de settings

        Returns:
            QuadratureResult: valor, error estimado, subdivisiones y convergencia.
            La falta de convergencia no es un error: converged=False

        Raises:
            PreconditionError: si el intervalo no es válido
            EvaluationError: si el integrando devuelve NaN
        """
        cfg = cfg or QuadratureConfig.from_settings()
        a, b = float(a), float(b)
        if not (0.0 <= a <= b < math.inf):
            raise PreconditionError(f'Intervalo inválido [{a}, {b}]: se requiere 0 ≤ a ≤ b < ∞')
        if a == b:
            return QuadratureResult(0.0, 0.0, 0, True)

        bordes = _bordes_iniciales(a, b, breakpoints)
        izquierdos, derechos = bordes[:-1], bordes[1:]
        valores, errores = _evaluar_paneles(integrand, izquierdos, derechos)

        paneles = [
            [izq, der, val, err]
            for izq, der, val, err in zip(izquierdos, derechos, valores, errores)
        ]
        montones = [(-err, indice) for indice, (_, _, _, err) in enumerate(paneles)]
        heapq.heapify(montones)

        total = math.fsum(valores)
        error_total = math.fsum(errores)
        subdivisiones = 0

        while error_total > cfg.tolerance_for(total) and subdivisiones < cfg.max_subdivisions and montones:
            _, indice = heapq.heappop(montones)
            izq, der, val, err = paneles[indice]
            medio = 0.5 * (izq + der)
            if not (izq < medio < der):
                # Panel del tamaño de la resolución de coma flotante
                continue
            nuevos_val, nuevos_err = _evaluar_paneles(
                integrand, np.array([izq, medio]), np.array([medio, der])
            )
            paneles[indice] = [izq, medio, nuevos_val[0], nuevos_err[0]]
            paneles.append([medio, der, nuevos_val[1], nuevos_err[1]])
            heapq.heappush(montones, (-nuevos_err[0], indice))
            heapq.heappush(montones, (-nuevos_err[1], len(paneles) - 1))
            total += nuevos_val[0] + nuevos_val[1] - val
            error_total += nuevos_err[0] + nuevos_err[1] - err
            subdivisiones += 1

        total = math.fsum(panel[2] for panel in paneles)
        error_total = math.fsum(panel[3] for panel in paneles)
        convergio = error_total <= cfg.tolerance_for(total)
        if not convergio:
            logger.warning(
                'Cuadratura sin convergencia en [%g, %g]: error %.3e tras %d subdivisiones',
                a, b, error_total, subdivisiones,
            )
        return QuadratureResult(total, error_total, subdivisiones, convergio)

    @staticmethod
    def integrate_tail(integrand, a, cfg=None, decay=None, breakpoints=()):
        """
        Integrar sobre [a, ∞)

        Con pista de decaimiento (integrando = O(z^{-p}), p > 1) se cambia a
        z = a/(1−u) y se corta en u_max, donde la cota analítica del resto
        queda por debajo de abs_tol, sin pasar de 1 − 2^{-40}. Sin pista se
        duplica el intervalo hasta que dos truncamientos sucesivos coinciden.

        Raises:
            PreconditionError: si a ≤ 0 o la pista no es mayor que 1
            DivergenceError: si los truncamientos no se estabilizan
        """
        cfg = cfg or QuadratureConfig.from_settings()
        a = float(a)
        if not (0.0 < a < math.inf):
            raise PreconditionError(f'Extremo inferior inválido a={a}: se requiere a > 0')
        if decay is None:
            return CuadraturaService._cola_por_duplicacion(integrand, a, cfg, breakpoints)
        if not decay > 1:
            raise PreconditionError(f'La pista de decaimiento p={decay} debe ser mayor que 1')
        return CuadraturaService._cola_racional(integrand, a, cfg, float(decay), breakpoints)

    @staticmethod
    def _cola_racional(integrand, a, cfg, p, breakpoints):
        sondas = a * _SONDAS_COLA
        constante = float(np.max(np.abs(np.asarray(integrand(sondas), dtype=float)) * sondas ** p))
        if not math.isfinite(constante):
            raise DivergenceError(f'El integrando no es finito en [{a}, ∞)')

        u_max, resto, cola_estimada = 1.0, 0.0, 0.0
        if constante > 0:
            corte = (constante / ((p - 1.0) * cfg.abs_tol)) ** (1.0 / (p - 1.0))
            # corte = 0 por subdesbordamiento: el resto desde a ya es despreciable
            cociente = a / corte if corte > 0.0 else math.inf
            if cociente < 1.0:
                cociente = max(cociente, _COCIENTE_MINIMO)
                corte = a / cociente
                u_max = 1.0 - cociente
                # Cota del resto como error; f(Z)·Z/(p−1) como estimación, exacta para potencias
                resto = constante * corte ** (1.0 - p) / (p - 1.0)
                cola_estimada = float(np.asarray(integrand(np.array([corte])), dtype=float)[0]) * corte / (p - 1.0)

        def transformado(u):
            u = np.asarray(u, dtype=float)
            w = 1.0 - u
            salida = np.zeros_like(u)
            vivos = w > 0
            z = a / w[vivos]
            salida[vivos] = np.asarray(integrand(z), dtype=float) * a / w[vivos] ** 2
            return salida

        rupturas = np.asarray(breakpoints, dtype=float) if len(breakpoints) else np.empty(0)
        rupturas = rupturas[rupturas > a]
        rupturas_u = np.union1d(1.0 - a / rupturas, _RUPTURAS_U)
        rupturas_u = rupturas_u[(rupturas_u > 0.0) & (rupturas_u < u_max)]
        resultado = CuadraturaService.integrate_finite(transformado, 0.0, u_max, rupturas_u, cfg)
        return QuadratureResult(
            resultado.value + cola_estimada,
            resultado.abs_error_estimate + resto,
            resultado.subdivisions,
            resultado.converged,
        )

    @staticmethod
    def _cola_por_duplicacion(integrand, a, cfg, breakpoints):
        total = 0.0
        error = 0.0
        subdivisiones = 0
        convergio = True
        pequenos = 0
        anterior = None
        inferior = a
        limite = min(cfg.max_subdivisions, MAX_DUPLICACIONES)
        for _ in range(limite):
            superior = 2.0 * inferior
            pieza = CuadraturaService.integrate_finite(
                integrand, inferior, superior, _rupturas_en(breakpoints, inferior, superior), cfg
            )
            total += pieza.value
            error += pieza.abs_error_estimate
            subdivisiones += pieza.subdivisions
            convergio = convergio and pieza.converged
            if not math.isfinite(total):
                break
            if abs(pieza.value) <= cfg.tolerance_for(total):
                pequenos += 1
                if pequenos >= 2:
                    # Resto geométrico estimado con el cociente de las dos últimas piezas
                    if anterior and abs(pieza.value) < abs(anterior):
                        razon = abs(pieza.value / anterior)
                        error += abs(pieza.value) * razon / (1.0 - razon)
                    return QuadratureResult(total, error, subdivisiones, convergio)
            else:
                pequenos = 0
            anterior = pieza.value
            inferior = superior
        raise DivergenceError(
            f'La integral sobre [{a}, ∞) no converge: los truncamientos no se estabilizan'
        )

    @staticmethod
    def panel_integrals(integrand, edges, breakpoints=(), cfg=None):
        """
        Integrales ∫_{e_k}^{e_{k+1}} entre bordes consecutivos ya ordenados

        Returns:
            tuple: (piezas, errores, convergio) con len(edges) − 1 piezas
        """
        cfg = cfg or QuadratureConfig.from_settings()
        bordes = np.asarray(edges, dtype=float)
        if bordes.size and np.any(np.diff(bordes) < 0):
            raise PreconditionError('Los bordes deben estar ordenados')
        piezas = np.zeros(max(bordes.size - 1, 0))
        errores = np.zeros_like(piezas)
        convergio = True
        for k in range(piezas.size):
            resultado = CuadraturaService.integrate_finite(
                integrand, bordes[k], bordes[k + 1],
                _rupturas_en(breakpoints, bordes[k], bordes[k + 1]), cfg,
            )
            piezas[k] = resultado.value
            errores[k] = resultado.abs_error_estimate
            convergio = convergio and resultado.converged
        return piezas, errores, convergio

    @staticmethod
    def cumulative_integral(integrand, points, start=0.0, breakpoints=(), cfg=None):
        """
        Integrales acumuladas ∫_start^{x_k} para todos los puntos de una vez

        Args:
            points (sequence): puntos ≥ start, en cualquier orden

        Returns:
            tuple: (valores, errores, convergio) con valores en el orden de entrada
        """
        puntos = np.asarray(points, dtype=float)
        orden = np.argsort(puntos, kind='stable')
        ordenados = puntos[orden]
        if ordenados.size and ordenados[0] < start:
            raise PreconditionError(f'Los puntos deben ser ≥ {start}')

        piezas, errores, convergio = CuadraturaService.panel_integrals(
            integrand, np.concatenate([[float(start)], ordenados]), breakpoints, cfg,
        )
        valores = np.empty_like(piezas)
        acumulados_err = np.empty_like(errores)
        valores[orden] = np.cumsum(piezas)
        acumulados_err[orden] = np.cumsum(errores)
        return valores, acumulados_err, convergio
