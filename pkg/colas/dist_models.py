"""
Construcción y validación de distribuciones en [0,∞) con F(0)=0
Familias analíticas con formas cerradas (oráculos de los tests) y
distribuciones empíricas construidas a partir de datos
"""
import dataclasses
import logging
import math
from pathlib import Path

import numpy as np
from scipy import optimize, special

from .exceptions import DomainError, InputError, PreconditionError
from .models import (
    DistributionModel, Familia, FamilySpec, InvariantCheck, TransformKind,
    ValidationReport,
)

logger = logging.getLogger(__name__)

TOLERANCIA_COMPLEMENTO = 1e-12


def _uniformes(rng, size):
    """Uniformes en (0, 1]: el extremo 0 produciría cuantiles infinitos"""
    return 1.0 - rng.random(size)


def _formas_cerradas(tail, density, w, wbar, moment):
    """
    Tabla de formas cerradas a partir de W_α, W̄_α y m(α) exactos

    Cada entrada es una fábrica α -> evaluador(x) (o None si no aplica).
    Las demás transformadas se obtienen por las identidades exactas:
    H = αW − x^αF̄, Ḡ = αx^{−α}W, G′ = αx^{−α−1}H, x G″ = αf − (α+1)G′
    """
    def h(alpha):
        w_alpha = w(alpha)
        return lambda x: alpha * w_alpha(x) - np.asarray(x, dtype=float) ** alpha * tail(x)

    def gbar(alpha):
        w_alpha = w(alpha)

        def evaluar(x):
            x = np.asarray(x, dtype=float)
            segura = np.where(x > 0, x, 1.0)
            return np.where(x > 0, alpha * segura ** -alpha * w_alpha(segura), 1.0)
        return evaluar

    def g(alpha):
        gbar_alpha = gbar(alpha)
        return lambda x: 1.0 - gbar_alpha(x)

    def gprime(alpha):
        h_alpha = h(alpha)
        return lambda x: alpha * np.asarray(x, dtype=float) ** (-alpha - 1.0) * h_alpha(x)

    def gsecond(alpha):
        if density is None:
            return None
        gprime_alpha = gprime(alpha)
        return lambda x: (alpha * density(x) - (alpha + 1.0) * gprime_alpha(x)) / np.asarray(x, dtype=float)

    return {
        TransformKind.W: w,
        TransformKind.WBAR: wbar,
        TransformKind.H: h,
        TransformKind.GBAR: gbar,
        TransformKind.G: g,
        TransformKind.GPRIME: gprime,
        TransformKind.GSECOND: gsecond,
        'moment': moment,
    }


def _pareto(beta, scale, name):
    s = float(scale)

    def tail(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < s, 1.0, (np.maximum(x, s) / s) ** -beta)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < s, 0.0, -np.expm1(-beta * np.log(np.maximum(x, s) / s)))

    def density(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > s, beta / s * (np.maximum(x, s) / s) ** (-beta - 1.0), 0.0)

    def w(alpha):
        def evaluar(x):
            x = np.asarray(x, dtype=float)
            arriba = np.maximum(x, s)
            if math.isclose(alpha, beta):
                resto = s ** alpha * np.log(arriba / s)
            else:
                resto = s ** beta * (arriba ** (alpha - beta) - s ** (alpha - beta)) / (alpha - beta)
            return np.where(x <= s, x ** alpha / alpha, s ** alpha / alpha + resto)
        return evaluar

    def wbar(alpha):
        if alpha >= beta:
            return None
        total = s ** alpha / alpha + s ** alpha / (beta - alpha)

        def evaluar(x):
            x = np.asarray(x, dtype=float)
            arriba = np.maximum(x, s)
            return np.where(
                x <= s,
                total - x ** alpha / alpha,
                s ** beta * arriba ** (alpha - beta) / (beta - alpha),
            )
        return evaluar

    def moment(alpha):
        return s ** alpha * beta / (beta - alpha) if alpha < beta else math.inf

    def sampler(rng, size):
        return s * _uniformes(rng, size) ** (-1.0 / beta)

    return DistributionModel(
        name=name,
        cdf=cdf,
        tail=tail,
        density=density,
        breakpoints=(s,),
        closed_forms=_formas_cerradas(tail, density, w, wbar, moment),
        moment_divergence_threshold=beta,
        tail_index=beta,
        sampler=sampler,
    )


def _pareto_log(beta, log_power):
    p = float(log_power)

    def bruta(x):
        x = np.asarray(x, dtype=float)
        segura = np.where(x > 0, x, 1.0)
        return np.where(x > 0, segura ** -beta * np.log(np.e + segura) ** p, np.inf)

    # Punto donde x^{−β}log(e+x)^p cruza 1: a partir de ahí la cola deja de valer 1
    inferior, superior = 1.0, 1.0
    while bruta(inferior) <= 1.0:
        inferior /= 2.0
    while bruta(superior) >= 1.0:
        superior *= 2.0
    cruce = optimize.brentq(
        lambda x: float(bruta(x)) - 1.0, inferior, superior, xtol=1e-300, rtol=4 * np.finfo(float).eps,
    )

    def tail(x):
        return np.minimum(1.0, bruta(x))

    def cdf(x):
        return 1.0 - tail(x)

    def density(x):
        x = np.asarray(x, dtype=float)
        segura = np.where(x > cruce, x, cruce)
        derivada = bruta(segura) * (beta / segura - p / ((np.e + segura) * np.log(np.e + segura)))
        return np.where(x > cruce, derivada, 0.0)

    def sampler(rng, size):
        objetivos = _uniformes(rng, size)
        salida = np.empty(objetivos.size)
        for k, u in enumerate(objetivos):
            if u >= 1.0:
                salida[k] = cruce
                continue
            techo = 2.0 * cruce
            while bruta(techo) > u:
                techo *= 2.0
            salida[k] = optimize.brentq(lambda x: float(bruta(x)) - u, cruce, techo, rtol=1e-14)
        return salida

    return DistributionModel(
        name=f'pareto_log(beta={beta:g}, log_power={p:g})',
        cdf=cdf,
        tail=tail,
        density=density,
        breakpoints=(float(cruce),),
        # Con p < −1 el momento de orden β es finito: no hay umbral exacto
        moment_divergence_threshold=beta if p >= -1.0 else None,
        sampler=sampler,
    )


def _exponencial(rate):
    r = float(rate)

    def tail(x):
        return np.exp(-r * np.asarray(x, dtype=float))

    def cdf(x):
        return -np.expm1(-r * np.asarray(x, dtype=float))

    def density(x):
        return r * np.exp(-r * np.asarray(x, dtype=float))

    def w(alpha):
        return lambda x: r ** -alpha * special.gamma(alpha) * special.gammainc(alpha, r * np.asarray(x, dtype=float))

    def wbar(alpha):
        return lambda x: r ** -alpha * special.gamma(alpha) * special.gammaincc(alpha, r * np.asarray(x, dtype=float))

    def moment(alpha):
        return special.gamma(alpha + 1.0) * r ** -alpha

    def sampler(rng, size):
        return -np.log(_uniformes(rng, size)) / r

    return DistributionModel(
        name=f'exponential(rate={r:g})',
        cdf=cdf,
        tail=tail,
        density=density,
        closed_forms=_formas_cerradas(tail, density, w, wbar, moment),
        sampler=sampler,
    )


def _degenerada(atom):
    a = float(atom)

    def tail(x):
        return np.where(np.asarray(x, dtype=float) < a, 1.0, 0.0)

    def cdf(x):
        return np.where(np.asarray(x, dtype=float) < a, 0.0, 1.0)

    def w(alpha):
        return lambda x: np.minimum(np.asarray(x, dtype=float), a) ** alpha / alpha

    def wbar(alpha):
        return lambda x: (a ** alpha - np.minimum(np.asarray(x, dtype=float), a) ** alpha) / alpha

    def moment(alpha):
        return a ** alpha

    def sampler(rng, size):
        return np.full(size, a)

    return DistributionModel(
        name=f'degenerate(atom={a:g})',
        cdf=cdf,
        tail=tail,
        breakpoints=(a,),
        closed_forms=_formas_cerradas(tail, None, w, wbar, moment),
        sampler=sampler,
    )


def _empirica(samples, name):
    datos = np.sort(np.asarray(samples, dtype=float))
    n = datos.size

    def mayores(x):
        # Continuidad por la derecha: el átomo en s cuenta en F(s)
        return n - np.searchsorted(datos, np.asarray(x, dtype=float), side='right')

    def tail(x):
        return mayores(x) / n

    def cdf(x):
        return (n - mayores(x)) / n

    def prefijos(alpha):
        return np.concatenate([[0.0], np.cumsum(datos ** alpha)])

    def w(alpha):
        acumulado = prefijos(alpha)

        def evaluar(x):
            x = np.asarray(x, dtype=float)
            j = np.searchsorted(datos, x, side='right')
            return (acumulado[j] + (n - j) * x ** alpha) / (alpha * n)
        return evaluar

    def wbar(alpha):
        w_alpha = w(alpha)
        total = prefijos(alpha)[-1] / (alpha * n)
        return lambda x: total - w_alpha(x)

    def moment(alpha):
        return float(np.mean(datos ** alpha))

    formas = _formas_cerradas(tail, None, w, wbar, moment)

    def h(alpha):
        acumulado = prefijos(alpha)
        return lambda x: acumulado[np.searchsorted(datos, np.asarray(x, dtype=float), side='right')] / n
    formas[TransformKind.H] = h

    def sampler(rng, size):
        return rng.choice(datos, size=size, replace=True)

    return DistributionModel(
        name=name,
        cdf=cdf,
        tail=tail,
        breakpoints=tuple(float(v) for v in np.unique(datos)),
        closed_forms=formas,
        sampler=sampler,
        samples=datos,
    )


class DistribucionService:
    """Servicios para construir y validar modelos de distribución"""

    @staticmethod
    def make_model(spec):
        """
        Construir un modelo a partir de su especificación

        Args:
            spec (FamilySpec): familia y parámetros

        Returns:
            DistributionModel: modelo inmutable que cumple sus invariantes

        Raises:
            DomainError: si un parámetro está fuera de su dominio
            InputError: si el fichero de muestras no se puede leer
        """
        spec.clean()
        familia = spec.family
        if familia == Familia.PARETO:
            beta, escala = float(spec.get('beta')), float(spec.get('scale', 1.0))
            modelo = _pareto(beta, escala, f'pareto(beta={beta:g}, scale={escala:g})')
        elif familia == Familia.BOUNDARY_RV:
            beta = float(spec.get('beta'))
            modelo = _pareto(beta, 1.0, f'boundary_rv(alpha0={beta:g})')
        elif familia == Familia.PARETO_LOG:
            modelo = _pareto_log(float(spec.get('beta')), float(spec.get('log_power', 0.0)))
        elif familia == Familia.EXPONENTIAL:
            modelo = _exponencial(float(spec.get('rate')))
        elif familia == Familia.DEGENERATE:
            modelo = _degenerada(float(spec.get('atom')))
        else:
            if spec.get('samples') is not None:
                muestras = np.asarray(spec.get('samples'), dtype=float)
                origen = 'datos en memoria'
            else:
                muestras = DistribucionService.load_samples(spec.get('samples_path'))
                origen = str(spec.get('samples_path'))
            if muestras.size < 1 or np.any(~(muestras > 0)):
                raise DomainError({'samples': 'Se requiere al menos una muestra y todas > 0'})
            modelo = _empirica(muestras, f'empirical(n={muestras.size}, {origen})')

        modelo = _con_familia(modelo, familia)
        modelo.clean()
        logger.info('Modelo construido: %s', modelo.name)
        return modelo

    @staticmethod
    def load_samples(path):
        """
        Leer un fichero de muestras: un decimal estrictamente positivo por línea

        Las líneas vacías y las que empiezan por '#' se ignoran.

        Raises:
            InputError: fichero ilegible, vacío o con una línea inválida (se nombra)
        """
        try:
            lineas = Path(path).read_text(encoding='utf-8').splitlines()
        except (OSError, UnicodeDecodeError) as e:
            raise InputError({'samples_path': f'No se puede leer {path}: {e}'})

        valores = []
        for numero, linea in enumerate(lineas, start=1):
            texto = linea.strip()
            if not texto or texto.startswith('#'):
                continue
            try:
                valor = float(texto)
            except ValueError:
                raise InputError({'samples_path': f'Línea {numero}: "{texto}" no es un número decimal'})
            if not (math.isfinite(valor) and valor > 0):
                raise InputError({'samples_path': f'Línea {numero}: la muestra {texto} debe ser estrictamente positiva'})
            valores.append(valor)

        if not valores:
            raise InputError({'samples_path': f'El fichero {path} no contiene muestras'})
        return np.asarray(valores, dtype=float)

    @staticmethod
    def validate_model(model, probe_grid):
        """
        Comprobar las invariantes de un modelo sobre una rejilla de prueba

        Los fallos son entradas del informe, no excepciones.

        Args:
            model (DistributionModel): modelo a comprobar
            probe_grid (sequence): puntos ordenados y no negativos

        Returns:
            ValidationReport: una entrada por invariante con el peor x
        """
        rejilla = np.asarray(probe_grid, dtype=float)
        if rejilla.size == 0 or np.any(np.diff(rejilla) < 0) or rejilla[0] < 0:
            raise PreconditionError('La rejilla de prueba debe ser no vacía, ordenada y no negativa')

        cdf = np.asarray(model.cdf(rejilla), dtype=float) * np.ones_like(rejilla)
        cola = np.asarray(model.tail(rejilla), dtype=float) * np.ones_like(rejilla)
        comprobaciones = []

        cero = float(model.cdf(0.0))
        comprobaciones.append(InvariantCheck('cdf_at_zero', cero == 0.0, 0.0, cero))

        comprobaciones.append(_peor_caida('cdf_nondecreasing', rejilla, cdf, crece=True))
        comprobaciones.append(_peor_caida('tail_nonincreasing', rejilla, cola, crece=False))

        desvio = np.abs(cdf + cola - 1.0)
        peor = int(np.argmax(desvio))
        comprobaciones.append(InvariantCheck(
            'complement', bool(desvio[peor] <= TOLERANCIA_COMPLEMENTO), float(rejilla[peor]), float(desvio[peor]),
        ))

        fuera = np.abs(np.clip(cola, 0.0, 1.0) - cola)
        peor = int(np.argmax(fuera))
        comprobaciones.append(InvariantCheck(
            'tail_in_unit_interval', bool(fuera[peor] == 0.0), float(rejilla[peor]), float(cola[peor]),
        ))

        extremos = (float(cola[0]), float(cola[-1]))
        degenerado = all(valor in (0.0, 1.0) for valor in extremos)
        comprobaciones.append(InvariantCheck(
            'tail_vanishes', extremos[1] < extremos[0] or degenerado, float(rejilla[-1]), extremos[1],
        ))

        rupturas = np.asarray(model.breakpoints, dtype=float)
        ordenadas = bool(rupturas.size < 2 or np.all(np.diff(rupturas) > 0))
        comprobaciones.append(InvariantCheck('breakpoints_sorted', ordenadas))

        informe = ValidationReport(model.name, tuple(comprobaciones), tuple(model.breakpoints))
        for fallo in informe.failed():
            logger.warning('Modelo %s: falla %s en x=%s', model.name, fallo.name, fallo.worst_x)
        return informe


def _peor_caida(nombre, rejilla, valores, crece):
    saltos = np.diff(valores) if crece else -np.diff(valores)
    if saltos.size == 0 or saltos.min() >= 0:
        return InvariantCheck(nombre, True)
    peor = int(np.argmin(saltos))
    return InvariantCheck(nombre, False, float(rejilla[peor + 1]), float(saltos[peor]))


def _con_familia(modelo, familia):
    return dataclasses.replace(modelo, family=familia)
