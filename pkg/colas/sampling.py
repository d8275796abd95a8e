"""
Verificación Monte Carlo de la representación probabilística de G_α:
G_α es la d.f. de X/Z con Z independiente de X y P(Z ≤ x) = x^α en [0, 1]
"""
import logging
import math

import numpy as np
from scipy import stats

from .exceptions import DomainError, PreconditionError
from .models import RepresentationCheck, SampleBatch, TransformKind
from .transforms import TransformService

logger = logging.getLogger(__name__)

SEMILLAS_POR_DEFECTO = (20240101, 20240102, 20240103)
# Redondeo admitido en una d.f. calculada por cuadratura
TOLERANCIA_CDF = 1e-12


def generador(seed):
    """Generador basado en contador: flujos independientes y reproducibles por semilla"""
    return np.random.Generator(np.random.Philox(int(seed)))


class MuestreoService:
    """Muestras de X/Z y contrastes de Kolmogorov-Smirnov"""

    @staticmethod
    def sample_williamson_ratio(model_sampler, p, n, seed):
        """
        Generar n valores de X/Z

        Se extraen primero los X con model_sampler(rng, n) y después los U
        del mismo generador; Z = U^{1/α} con U uniforme en (0, 1].

        Args:
            model_sampler (callable): (rng, size) -> muestras de la ley del modelo
            p (TransformParams): α
            n (int): tamaño de la muestra, n ≥ 1
            seed (int): semilla de 64 bits

        Returns:
            SampleBatch: determinista dada la semilla

        Raises:
            DomainError: n < 1, semilla inválida o el muestreador devuelve valores ≤ 0
        """
        if model_sampler is None:
            raise PreconditionError('El modelo no ofrece muestreador')
        n = int(n)
        if n < 1:
            raise DomainError({'n': 'Se requiere al menos una muestra'})
        if not 0 <= int(seed) < 2 ** 64:
            raise DomainError({'seed': 'La semilla debe ser un entero de 64 bits sin signo'})

        rng = generador(seed)
        x = np.asarray(model_sampler(rng, n), dtype=float).ravel()
        if x.size != n or np.any(~(x > 0)):
            raise DomainError({'sampler': 'El muestreador debe devolver n valores estrictamente positivos'})
        z = (1.0 - rng.random(n)) ** (1.0 / p.alpha)
        return SampleBatch(values=x / z, n=n, seed=int(seed), alpha=p.alpha, base_draws=x)

    @staticmethod
    def ks_statistic(batch, cdf_evaluator):
        """
        Estadístico KS entre la d.f. empírica del lote y cdf_evaluator

        Raises:
            DomainError: lote vacío o cdf_evaluator fuera de [0, 1]
        """
        valores = np.asarray(batch.values, dtype=float)
        if valores.size == 0:
            raise DomainError({'batch': 'El lote está vacío'})

        def cdf(x):
            f = np.asarray(cdf_evaluator(x), dtype=float) * np.ones_like(x, dtype=float)
            fuera = ~((f >= -TOLERANCIA_CDF) & (f <= 1.0 + TOLERANCIA_CDF))
            if fuera.any():
                raise DomainError({'cdf_evaluator': f'Valor {f[fuera][0]!r} fuera de [0, 1]'})
            return np.clip(f, 0.0, 1.0)

        return float(stats.kstest(valores, cdf).statistic)

    @staticmethod
    def ks_critical_value(n, level=0.99):
        """Valor crítico asintótico de Kolmogorov: K_level/√n (1.628/√n al 99%)"""
        if not 0 < level < 1:
            raise DomainError({'level': 'El nivel debe estar en (0, 1)'})
        return float(stats.kstwobign.ppf(level) / math.sqrt(n))

    @staticmethod
    def representation_check(model, p, n=10_000, seeds=SEMILLAS_POR_DEFECTO, level=0.99):
        """
        Contrastar la muestra de X/Z con G_α calculada por cuadratura

        Returns:
            RepresentationCheck: estadístico por semilla y veredicto con un fallo tolerado
        """
        g = TransformService.evaluator(model, TransformKind.G, p)
        critico = MuestreoService.ks_critical_value(n, level)
        estadisticos = []
        for semilla in seeds:
            lote = MuestreoService.sample_williamson_ratio(model.sampler, p, n, semilla)
            estadistico = MuestreoService.ks_statistic(lote, g)
            logger.info('KS %s α=%g semilla %d: %.5f (crítico %.5f)', model.name, p.alpha, semilla, estadistico, critico)
            estadisticos.append(estadistico)
        return RepresentationCheck(
            alpha=p.alpha,
            n=int(n),
            seeds=tuple(int(s) for s in seeds),
            statistics=tuple(estadisticos),
            critical_value=critico,
            level=level,
        )
