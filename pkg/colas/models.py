"""
Tipos de dominio de httool
Distribuciones en [0,∞), transformadas, informes de diagnóstico y escenarios.
No hay persistencia: son objetos inmutables en memoria con validación al estilo
de los modelos de Django (método clean que lanza ValidationError por campo)
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
from django.conf import settings
from django.db import models
from django.utils.translation import gettext_lazy as _

from .exceptions import DomainError


class Familia(models.TextChoices):
    PARETO = 'pareto', _('Pareto')
    PARETO_LOG = 'pareto_log', _('Pareto con factor logarítmico')
    BOUNDARY_RV = 'boundary_rv', _('Frontera θ=0')
    EXPONENTIAL = 'exponential', _('Exponencial')
    DEGENERATE = 'degenerate', _('Degenerada')
    EMPIRICAL = 'empirical', _('Empírica')


class TransformKind(models.TextChoices):
    H = 'H', _('Momento truncado H_α')
    W = 'W', _('Integral de cola W_α')
    WBAR = 'Wbar', _('Complemento W̄_α')
    G = 'G', _('Transformada de Williamson G_α')
    GBAR = 'Gbar', _('Cola Ḡ_α')
    GPRIME = 'Gprime', _('Derivada G′_α')
    GSECOND = 'Gsecond', _('Segunda derivada G″_α')


class ObjetivoDeHaan(models.TextChoices):
    GBAR_SCALED = 'GbarScaled', _('x^αḠ_α(x)')
    H = 'H', _('H_α(x)')
    W = 'W', _('W_α(x)')


class NormalizadorL(models.TextChoices):
    AUTO = 'auto', _('L(x) = x^αF̄(x)')
    CONSTANT_ONE = 'constant_one', _('L ≡ 1')


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerancias y límite de subdivisiones de la cuadratura adaptativa"""
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 2000

    def __post_init__(self):
        self.clean()

    def clean(self):
        """Validar que todos los valores sean estrictamente positivos"""
        for nombre in ('rel_tol', 'abs_tol', 'max_subdivisions'):
            if not getattr(self, nombre) > 0:
                raise DomainError({nombre: _('Debe ser estrictamente positivo')})

    @classmethod
    def from_settings(cls):
        """Configuración por defecto tomada de settings (HTTOOL_QUAD_*)"""
        return cls(
            rel_tol=settings.HTTOOL_QUAD_REL_TOL,
            abs_tol=settings.HTTOOL_QUAD_ABS_TOL,
            max_subdivisions=settings.HTTOOL_QUAD_MAX_SUBDIVISIONS,
        )

    def tolerance_for(self, value):
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    subdivisions: int
    converged: bool


@dataclass(frozen=True)
class FamilySpec:
    """
    Descripción declarativa de una familia de distribuciones

    params admite: beta, scale, log_power, rate, atom, samples_path
    """
    family: str
    params: Mapping[str, object] = field(default_factory=dict)

    def clean(self):
        """Validar los dominios de los parámetros de la familia"""
        if self.family not in Familia.values:
            raise DomainError({'family': _(f'Familia desconocida: {self.family}')})

        requeridos = {
            Familia.PARETO: ('beta',),
            Familia.PARETO_LOG: ('beta',),
            Familia.BOUNDARY_RV: ('beta',),
            Familia.EXPONENTIAL: ('rate',),
            Familia.DEGENERATE: ('atom',),
            Familia.EMPIRICAL: (),
        }[self.family]
        for nombre in requeridos:
            if self.params.get(nombre) is None:
                raise DomainError({nombre: _(f'Parámetro obligatorio para la familia {self.family}')})

        if self.family == Familia.EMPIRICAL and self.params.get('samples_path') is None and self.params.get('samples') is None:
            raise DomainError({'samples_path': _('Se requiere samples_path o samples para la familia empirical')})

        for nombre in ('beta', 'scale', 'rate', 'atom'):
            valor = self.params.get(nombre)
            if valor is not None and not (math.isfinite(float(valor)) and float(valor) > 0):
                raise DomainError({nombre: _('Debe ser un real estrictamente positivo')})

        if self.family == Familia.PARETO_LOG:
            potencia = float(self.params.get('log_power', 0.0))
            if not math.isfinite(potencia) or potencia > float(self.params['beta']):
                # p ≤ β mantiene x^{−β}log(e+x)^p decreciente en todo [0,∞)
                raise DomainError({'log_power': _('Debe ser finito y no mayor que beta')})

    def get(self, nombre, default=None):
        valor = self.params.get(nombre)
        return default if valor is None else valor


@dataclass(frozen=True, eq=False)
class DistributionModel:
    """
    Distribución en [0,∞) con F(0)=0

    La cola se guarda aparte de la d.f.: 1 − cdf pierde toda la precisión a x
    grande y los límites que se verifican dependen de F̄ cuando x→∞.
    Todos los evaluadores aceptan escalares o arrays de numpy.
    """
    name: str
    cdf: Callable
    tail: Callable
    density: Optional[Callable] = None
    breakpoints: Tuple[float, ...] = ()
    # TransformKind -> fábrica α -> evaluador exacto (o None fuera de su validez)
    closed_forms: Mapping[str, Callable] = field(default_factory=dict)
    moment_divergence_threshold: Optional[float] = None
    # Índice de una cola potencial exacta más allá del último punto de ruptura
    tail_index: Optional[float] = None
    sampler: Optional[Callable] = None
    samples: Optional[np.ndarray] = None
    family: Optional[str] = None

    def clean(self):
        """Validar las invariantes estructurales del modelo"""
        puntos = np.asarray(self.breakpoints, dtype=float)
        if puntos.size and (np.any(puntos < 0) or np.any(np.diff(puntos) <= 0)):
            raise DomainError({'breakpoints': _('Deben ser no negativos y estrictamente crecientes')})
        if float(self.cdf(0.0)) != 0.0:
            raise DomainError({'cdf': _('Se requiere F(0) = 0')})

    @property
    def has_density(self):
        return self.density is not None

    def closed_form(self, kind, alpha):
        """Evaluador exacto para (kind, α) o None si la tabla no lo cubre"""
        fabrica = self.closed_forms.get(kind)
        if fabrica is None:
            return None
        return fabrica(alpha)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class InvariantCheck:
    name: str
    passed: bool
    worst_x: Optional[float] = None
    worst_value: Optional[float] = None


@dataclass(frozen=True)
class ValidationReport:
    model_name: str
    checks: Tuple[InvariantCheck, ...]
    breakpoints: Tuple[float, ...] = ()

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def failed(self):
        return [check for check in self.checks if not check.passed]

    def __getitem__(self, name):
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)


@dataclass(frozen=True)
class TransformParams:
    """Parámetros de una transformada: α > 0 y la configuración de cuadratura"""
    alpha: float
    quad: QuadratureConfig = field(default_factory=QuadratureConfig.from_settings)

    def __post_init__(self):
        self.clean()

    def clean(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError({'alpha': _('α debe ser un real estrictamente positivo')})


@dataclass(frozen=True)
class ExtendedReal:
    """Real no negativo o +∞ (por ejemplo m(α))"""
    value: float

    def __post_init__(self):
        if math.isnan(self.value) or self.value < 0:
            raise DomainError({'value': _('Debe ser un real no negativo o +∞')})

    @classmethod
    def infinite(cls):
        return cls(math.inf)

    @property
    def is_finite(self):
        return math.isfinite(self.value)

    def __float__(self):
        return float(self.value)

    def __str__(self):
        return '+inf' if not self.is_finite else repr(self.value)


def _limite_momento(factor):
    def formula(alpha, theta, moment=None):
        if moment is None:
            raise DomainError({'moment': _('El límite requiere m(α)')})
        return factor(alpha) * moment
    return formula


@dataclass(frozen=True)
class DiagnosticItem:
    id: str
    description: str
    limit_formula: Callable
    regime: str

    def limit(self, alpha, theta=None, moment=None):
        return float(self.limit_formula(alpha, theta, moment))


DIAGNOSTIC_ITEMS: Dict[str, DiagnosticItem] = {
    item.id: item for item in (
        DiagnosticItem('T1d', 'F̄/Ḡ_α', lambda a, t, m=None: t / a, 'T1'),
        DiagnosticItem('T1f', 'x^αF̄/H_α', lambda a, t, m=None: t / (a - t), 'T1'),
        DiagnosticItem('T1g', 'x^αḠ_α/H_α', lambda a, t, m=None: a / (a - t), 'T1'),
        DiagnosticItem('T1h', 'x^αF̄/W_α', lambda a, t, m=None: t, 'T1'),
        DiagnosticItem('T2d', 'W̄_α/(x^αF̄)', lambda a, t, m=None: 1.0 / (t - a), 'T2'),
        DiagnosticItem('T2e', '(x^{−α}m(α)−Ḡ_α)/F̄', lambda a, t, m=None: a / (t - a), 'T2'),
        DiagnosticItem('T2g', '(m(α)−H_α)/(x^αF̄)', lambda a, t, m=None: t / (t - a), 'T2'),
        DiagnosticItem('C1', 'x^αḠ_α', _limite_momento(lambda a: 1.0), 'C'),
        DiagnosticItem('C2', 'x^{1+α}G′_α', _limite_momento(lambda a: a), 'C'),
        DiagnosticItem('C3', 'x^{2+α}G″_α (δ=α)', _limite_momento(lambda a: -a * (a + 1.0)), 'C'),
        DiagnosticItem('K1', 'xU(x)/∫₀ˣU', lambda a, t, m=None: t + 1.0, 'K'),
        DiagnosticItem('K2', 'xU(x)/∫ₓ^∞U', lambda a, t, m=None: -(t + 1.0), 'K'),
        DiagnosticItem('D1', 'x^{1+α}G′_α/H_α', lambda a, t, m=None: a, 'D'),
    )
}


@dataclass
class DiagnosticReport:
    """Resultado de un diagnóstico de límite sobre una rejilla creciente"""
    item: DiagnosticItem
    alpha: float
    theta: Optional[float]
    grid: List[float]
    ratios: List[float]
    theoretical_limit: float
    rel_errors: List[float]
    final_rel_error: float
    converged: bool
    monotone_tail_of_errors: bool
    notes: List[str] = field(default_factory=list)
    auxiliary: Dict[str, List[float]] = field(default_factory=dict)

    @property
    def id(self):
        return self.item.id

    def rows(self):
        """Filas (x, value, theoretical_limit, rel_error) para el CSV"""
        return [
            (x, valor, self.theoretical_limit, error)
            for x, valor, error in zip(self.grid, self.ratios, self.rel_errors)
        ]


@dataclass(frozen=True)
class RVEstimate:
    index_hat: float
    per_scale_slopes: Tuple[Tuple[float, float], ...]
    t: float


@dataclass(frozen=True)
class DeHaanCheck:
    target: str
    L_spec: str
    grid: Tuple[float, ...]
    t_values: Tuple[float, ...]
    normalized_increments: np.ndarray
    beta_hat: float
    lambda_hat: float
    relation_residual: float
    per_x_beta: Tuple[float, ...] = ()


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray
    n: int
    seed: int
    alpha: float
    base_draws: Optional[np.ndarray] = None


@dataclass(frozen=True)
class RepresentationCheck:
    """Contraste KS de la representación G_α = d.f. de X/Z sobre varias semillas"""
    alpha: float
    n: int
    seeds: Tuple[int, ...]
    statistics: Tuple[float, ...]
    critical_value: float
    level: float = 0.99

    @property
    def passes(self):
        return sum(1 for d in self.statistics if d < self.critical_value)

    @property
    def passed(self):
        # Se tolera un fallo: el contraste rechaza por azar con probabilidad 1 − level
        return self.passes >= max(1, len(self.seeds) - 1)


@dataclass(frozen=True)
class GridSpec:
    """Rejilla geométrica x_k = x0·factor^k, k = 0..count−1"""
    x0: float = 10.0
    factor: float = 2.0
    count: int = 21

    def clean(self):
        if not (math.isfinite(self.x0) and self.x0 > 0):
            raise DomainError({'grid': _('x0 debe ser estrictamente positivo')})
        if not self.factor > 1:
            raise DomainError({'grid': _('factor debe ser mayor que 1')})
        if self.count < 4:
            raise DomainError({'grid': _('count debe ser al menos 4')})

    @classmethod
    def parse(cls, texto):
        """Leer una rejilla escrita como x0:factor:count"""
        partes = str(texto).split(':')
        if len(partes) != 3:
            raise DomainError({'grid': _('Formato esperado x0:factor:count')})
        try:
            rejilla = cls(float(partes[0]), float(partes[1]), int(partes[2]))
        except ValueError:
            raise DomainError({'grid': _('Formato esperado x0:factor:count')})
        rejilla.clean()
        return rejilla

    def points(self):
        return self.x0 * self.factor ** np.arange(self.count, dtype=float)

    def __str__(self):
        return f'{self.x0:g}:{self.factor:g}:{self.count}'


@dataclass(frozen=True)
class ScenarioConfig:
    """Descripción declarativa de una ejecución de `httool run`"""
    family: FamilySpec
    alpha: float
    theta: Optional[float]
    diagnostics: Tuple[str, ...]
    grid: GridSpec
    ratio_rel: float
    quad: QuadratureConfig
    output_dir: str
    seed: int
    options: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    def section(self, diagnostico):
        return self.options.get(diagnostico, {})


@dataclass
class RunSummary:
    verdicts: Dict[str, bool] = field(default_factory=dict)
    final_errors: Dict[str, float] = field(default_factory=dict)
    files_written: List[str] = field(default_factory=list)
    wall_time: float = 0.0
    messages: List[str] = field(default_factory=list)

    @property
    def all_converged(self):
        return all(self.verdicts.values())

    @property
    def exit_code(self):
        return 0 if self.all_converged else 1

    def record(self, diagnostico, convergio, error_final):
        self.verdicts[diagnostico] = bool(convergio)
        self.final_errors[diagnostico] = float(error_final)
