"""
Tests para las transformadas, el momento y las fórmulas de inversión
"""
import math

import numpy as np
from django.test import SimpleTestCase

from colas.dist_models import DistribucionService
from colas.exceptions import CapabilityError, DivergenceError, DomainError, PreconditionError
from colas.models import FamilySpec, TransformKind, TransformParams
from colas.transforms import TransformService


def modelo(family, **params):
    return DistribucionService.make_model(FamilySpec(family, params))


class EvaluateTransformTest(SimpleTestCase):
    """Tests para valores puntuales frente a cálculos a mano"""

    def test_degenerada(self):
        """Test para la degenerada en 2 con α=1"""
        m = modelo('degenerate', atom=2.0)
        p = TransformParams(1.0)
        self.assertAlmostEqual(TransformService.evaluate_transform(m, 'H', p, 3.0), 2.0, places=12)
        self.assertAlmostEqual(TransformService.evaluate_transform(m, 'G', p, 3.0), 1.0 / 3.0, places=12)
        self.assertAlmostEqual(TransformService.evaluate_transform(m, 'Gbar', p, 3.0), 2.0 / 3.0, places=12)

    def test_pareto(self):
        """Test para pareto(1, 1) con α=2: H(10)=9 y G′(10)=0.018"""
        m = modelo('pareto', beta=1.0, scale=1.0)
        p = TransformParams(2.0)
        self.assertAlmostEqual(TransformService.evaluate_transform(m, 'W', p, 10.0), 9.5, places=10)
        self.assertAlmostEqual(TransformService.evaluate_transform(m, 'H', p, 10.0), 9.0, places=10)
        self.assertAlmostEqual(TransformService.evaluate_transform(m, 'Gprime', p, 10.0), 0.018, places=12)

    def test_frontera(self):
        """Test para boundary_rv con α=2: W(e) = 1/2 + 1"""
        m = modelo('boundary_rv', beta=2.0)
        p = TransformParams(2.0)
        self.assertAlmostEqual(TransformService.evaluate_transform(m, 'W', p, math.e), 1.5, places=10)

    def test_convenios_en_cero(self):
        """Test para los valores por continuidad en x = 0"""
        m = modelo('pareto', beta=3.0, scale=1.0)
        p = TransformParams(2.0)
        self.assertEqual(TransformService.evaluate_transform(m, 'H', p, 0.0), 0.0)
        self.assertEqual(TransformService.evaluate_transform(m, 'W', p, 0.0), 0.0)
        self.assertEqual(TransformService.evaluate_transform(m, 'G', p, 0.0), 0.0)
        self.assertEqual(TransformService.evaluate_transform(m, 'Gbar', p, 0.0), 1.0)
        self.assertAlmostEqual(TransformService.evaluate_transform(m, 'Wbar', p, 0.0), 1.5, places=10)

    def test_wbar_sin_restar(self):
        """Test para W̄ a x grande frente a la forma cerrada s^β x^{α−β}/(β−α)"""
        m = modelo('pareto', beta=3.0, scale=1.0)
        p = TransformParams(2.0)
        xs = np.array([1e6, 10.0, 0.5, 1e3])
        valores = TransformService.evaluate_grid(m, 'Wbar', p, xs)
        exactos = TransformService.closed_form(m, 'Wbar', 2.0, xs)
        np.testing.assert_allclose(valores, exactos, rtol=1e-9)

    def test_salida_completa(self):
        """Test para full_output con errores y convergencia"""
        m = modelo('exponential', rate=1.0)
        valores, errores, convergio = TransformService.evaluate_grid(
            m, 'W', TransformParams(1.0), [1.0, 2.0], full_output=True,
        )
        np.testing.assert_allclose(valores, -np.expm1([-1.0, -2.0]), rtol=1e-12)
        self.assertTrue(convergio)
        self.assertTrue(np.all(errores >= 0))

    def test_evaluador_conserva_la_forma(self):
        """Test para el callable vectorizado con escalares y matrices"""
        m = modelo('pareto', beta=3.0, scale=1.0)
        p = TransformParams(2.0)
        g = TransformService.evaluator(m, 'G', p)
        gbar = TransformService.evaluator(m, 'Gbar', p)
        xs = np.array([[0.0, 0.5], [2.0, 40.0]])
        self.assertEqual(g(xs).shape, (2, 2))
        np.testing.assert_allclose(g(xs) + gbar(xs), np.ones((2, 2)), atol=1e-9)
        self.assertIsInstance(g(2.0), float)


class IdentidadesTest(SimpleTestCase):
    """Tests para las identidades exactas entre transformadas"""

    def setUp(self):
        """Configuración inicial para los tests"""
        self.m = modelo('pareto', beta=3.0, scale=1.0)
        self.alpha = 2.0
        self.p = TransformParams(self.alpha)
        self.xs = np.array([0.5, 1.5, 7.0, 120.0])

    def evaluar(self, kind):
        return TransformService.evaluate_grid(self.m, kind, self.p, self.xs)

    def test_h_desde_w(self):
        """Test para H = αW − x^αF̄"""
        esperado = self.alpha * self.evaluar('W') - self.xs ** self.alpha * self.m.tail(self.xs)
        np.testing.assert_allclose(self.evaluar('H'), esperado, rtol=1e-10, atol=1e-14)

    def test_gbar_y_gprime(self):
        """Test para Ḡ = αx^{−α}W y G′ = αx^{−α−1}H"""
        w, h = self.evaluar('W'), self.evaluar('H')
        np.testing.assert_allclose(self.evaluar('Gbar'), self.alpha * self.xs ** -self.alpha * w, rtol=1e-10, atol=1e-14)
        np.testing.assert_allclose(
            self.evaluar('Gprime'), self.alpha * self.xs ** (-self.alpha - 1.0) * h, rtol=1e-10, atol=1e-14,
        )

    def test_frente_a_formas_cerradas(self):
        """Test para todas las transformadas frente a la tabla del modelo"""
        for kind in TransformKind.values:
            with self.subTest(kind=kind):
                exactos = TransformService.closed_form(self.m, kind, self.alpha, self.xs)
                np.testing.assert_allclose(self.evaluar(kind), exactos, rtol=1e-8, atol=1e-13)


class MomentTest(SimpleTestCase):
    """Tests para m(α)"""

    def test_momentos_finitos(self):
        """Test para momentos conocidos"""
        casos = [
            (modelo('degenerate', atom=2.0), 3.0, 8.0),
            (modelo('exponential', rate=1.0), 2.0, 2.0),
            (modelo('pareto', beta=3.0, scale=1.0), 2.0, 3.0),
        ]
        for m, alpha, esperado in casos:
            with self.subTest(modelo=m.name):
                valor = TransformService.moment(m, TransformParams(alpha))
                self.assertTrue(valor.is_finite)
                self.assertAlmostEqual(float(valor), esperado, places=8)

    def test_momento_infinito(self):
        """Test para m(2) = ∞ en pareto(1, 1)"""
        valor = TransformService.moment(modelo('pareto', beta=1.0, scale=1.0), TransformParams(2.0))
        self.assertFalse(valor.is_finite)
        self.assertEqual(str(valor), '+inf')


class InversionTest(SimpleTestCase):
    """Tests para las fórmulas que recuperan F̄ y F"""

    def test_cola_desde_h(self):
        """Test para F̄ recuperada de H_α"""
        casos = [
            (modelo('degenerate', atom=2.0), 1.0, 3.0, 0.0),
            (modelo('degenerate', atom=2.0), 1.0, 1.0, 1.0),
            (modelo('pareto', beta=1.0, scale=1.0), 2.0, 10.0, 0.1),
            (modelo('exponential', rate=1.0), 1.0, 2.0, math.exp(-2.0)),
        ]
        for m, alpha, x, esperado in casos:
            with self.subTest(modelo=m.name, x=x):
                valor = TransformService.invert_tail_from_H(m, TransformParams(alpha), x)
                self.assertAlmostEqual(valor, esperado, delta=1e-8)

    def test_cola_desde_diferencia_de_momento(self):
        """Test para F̄(5) = 0.008 en pareto(3, 1) con α=2"""
        m = modelo('pareto', beta=3.0, scale=1.0)
        valor = TransformService.invert_tail_from_moment_gap(m, TransformParams(2.0), 5.0)
        self.assertAlmostEqual(valor, 0.008, delta=1e-9)

    def test_diferencia_de_momento_infinito(self):
        """Test para la inversión por m(α) − H_α con m(α) = ∞"""
        with self.assertRaises(PreconditionError):
            TransformService.invert_tail_from_moment_gap(
                modelo('pareto', beta=1.0, scale=1.0), TransformParams(2.0), 5.0,
            )

    def test_f_desde_g(self):
        """Test para F recuperada de G_α con derivada numérica"""
        casos = [
            (modelo('degenerate', atom=2.0), 1.0, 3.0, 1.0),
            (modelo('pareto', beta=1.0, scale=1.0), 2.0, 10.0, 0.9),
            (modelo('exponential', rate=1.0), 1.0, 1.0, -math.expm1(-1.0)),
        ]
        for m, alpha, x, esperado in casos:
            with self.subTest(modelo=m.name):
                valor = TransformService.invert_F_from_G(m, TransformParams(alpha), x)
                self.assertAlmostEqual(valor, esperado, delta=1e-7)

    def test_diferencia_central_frente_a_identidad(self):
        """Test para G′ numérica frente a αx^{−α−1}H"""
        m = modelo('pareto', beta=1.0, scale=1.0)
        p = TransformParams(2.0)
        numerica = TransformService.central_difference_gprime(m, p, 10.0)
        self.assertAlmostEqual(numerica, 0.018, delta=1e-6 * 0.018)

    def test_cerca_de_un_punto_de_ruptura(self):
        """Test para la diferencia central junto a la escala de pareto"""
        with self.assertRaises(PreconditionError):
            TransformService.invert_F_from_G(
                modelo('pareto', beta=1.0, scale=1.0), TransformParams(2.0), 1.0,
            )


class ErroresTest(SimpleTestCase):
    """Tests para las condiciones de error de las transformadas"""

    def test_segunda_derivada_sin_densidad(self):
        """Test para G″ sobre la degenerada"""
        with self.assertRaises(CapabilityError):
            TransformService.evaluate_transform(modelo('degenerate', atom=2.0), 'Gsecond', TransformParams(1.0), 3.0)

    def test_wbar_divergente(self):
        """Test para W̄ con α ≥ β"""
        with self.assertRaises(DivergenceError):
            TransformService.evaluate_transform(
                modelo('pareto', beta=1.0, scale=1.0), 'Wbar', TransformParams(2.0), 3.0,
            )

    def test_derivada_en_cero(self):
        """Test para G′ en x = 0"""
        with self.assertRaises(PreconditionError):
            TransformService.evaluate_transform(
                modelo('exponential', rate=1.0), 'Gprime', TransformParams(1.0), 0.0,
            )

    def test_transformada_desconocida(self):
        """Test para un kind inexistente y puntos negativos"""
        m = modelo('exponential', rate=1.0)
        with self.assertRaises(DomainError):
            TransformService.evaluate_grid(m, 'Gtercera', TransformParams(1.0), [1.0])
        with self.assertRaises(PreconditionError):
            TransformService.evaluate_grid(m, 'H', TransformParams(1.0), [-1.0])

    def test_alpha_no_positivo(self):
        """Test para α ≤ 0"""
        with self.assertRaises(DomainError):
            TransformParams(0.0)


class ClosedFormTest(SimpleTestCase):
    """Tests para la consulta de formas cerradas"""

    def test_momento(self):
        """Test para m(α) exacto, finito e infinito"""
        self.assertEqual(float(TransformService.closed_form(modelo('degenerate', atom=2.0), 'moment', 3.0)), 8.0)
        infinito = TransformService.closed_form(modelo('pareto', beta=1.0, scale=1.0), 'moment', 2.0)
        self.assertFalse(infinito.is_finite)

    def test_sin_forma_cerrada(self):
        """Test para modelos y transformadas sin tabla"""
        with self.assertRaises(CapabilityError):
            TransformService.closed_form(modelo('degenerate', atom=2.0), 'Gsecond', 1.0, 3.0)
        with self.assertRaises(CapabilityError):
            TransformService.closed_form(modelo('pareto_log', beta=1.5, log_power=1.0), 'H', 1.0, 3.0)
        with self.assertRaises(DivergenceError):
            TransformService.closed_form(modelo('pareto', beta=1.0, scale=1.0), 'Wbar', 2.0, 3.0)


FAMILIAS = [
    ('pareto', {'beta': 4.5, 'scale': 1.0}),
    ('pareto_log', {'beta': 6.0, 'log_power': 1.0}),
    ('boundary_rv', {'beta': 2.0}),
    ('exponential', {'rate': 1.0}),
    ('degenerate', {'atom': 2.0}),
]
ALFAS = (0.5, 1.0, 2.0, 3.5)
REJILLA = np.geomspace(1e-2, 1e4, 21)


def casos(suaves=False):
    """(modelo, TransformParams) para cada familia y cada α"""
    for familia, params in FAMILIAS:
        m = modelo(familia, **params)
        if suaves and not m.has_density:
            continue
        for alpha in ALFAS:
            yield m, TransformParams(alpha)


class MatrizIdentidadesTest(SimpleTestCase):
    """Tests para las identidades exactas en todas las familias, α y puntos"""

    def test_cola_desde_gbar_y_h(self):
        """Test para F̄ = Ḡ_α − x^{−α}H_α"""
        for m, p in casos():
            with self.subTest(modelo=m.name, alpha=p.alpha):
                gbar = TransformService.evaluate_grid(m, 'Gbar', p, REJILLA)
                h = TransformService.evaluate_grid(m, 'H', p, REJILLA)
                np.testing.assert_allclose(gbar - REJILLA ** -p.alpha * h, m.tail(REJILLA), rtol=0, atol=1e-9)

    def test_gbar_desde_w(self):
        """Test para Ḡ_α = αx^{−α}W_α"""
        for m, p in casos():
            with self.subTest(modelo=m.name, alpha=p.alpha):
                gbar = TransformService.evaluate_grid(m, 'Gbar', p, REJILLA)
                w = TransformService.evaluate_grid(m, 'W', p, REJILLA)
                np.testing.assert_allclose(gbar, p.alpha * REJILLA ** -p.alpha * w, rtol=1e-10)

    def test_momento_menos_gbar(self):
        """Test para m(α) − x^αḠ_α = αW̄_α cuando m(α) < ∞"""
        for m, p in casos():
            momento = TransformService.moment(m, p)
            if not momento.is_finite:
                continue
            with self.subTest(modelo=m.name, alpha=p.alpha):
                gbar = TransformService.evaluate_grid(m, 'Gbar', p, REJILLA)
                wbar = TransformService.evaluate_grid(m, 'Wbar', p, REJILLA)
                np.testing.assert_allclose(
                    float(momento) - REJILLA ** p.alpha * gbar, p.alpha * wbar,
                    rtol=0, atol=1e-9 * max(1.0, float(momento)),
                )

    def test_momento_menos_h(self):
        """Test para m(α) − H_α = αW̄_α + x^αF̄ cuando m(α) < ∞"""
        for m, p in casos():
            momento = TransformService.moment(m, p)
            if not momento.is_finite:
                continue
            with self.subTest(modelo=m.name, alpha=p.alpha):
                h = TransformService.evaluate_grid(m, 'H', p, REJILLA)
                wbar = TransformService.evaluate_grid(m, 'Wbar', p, REJILLA)
                np.testing.assert_allclose(
                    float(momento) - h, p.alpha * wbar + REJILLA ** p.alpha * m.tail(REJILLA),
                    rtol=0, atol=1e-9 * max(1.0, float(momento)),
                )

    def test_w_a_gran_escala_no_depende_de_la_rejilla(self):
        """Test para W_α de la exponencial en 10⁴ y 10⁶, en solitario y en rejilla"""
        m = modelo('exponential', rate=1.0)
        p = TransformParams(2.0)
        for x in (1e4, 1e6):
            with self.subTest(x=x):
                self.assertAlmostEqual(TransformService.evaluate_transform(m, 'W', p, x), 1.0, delta=1e-9)
        rejilla = TransformService.evaluate_grid(m, 'W', p, np.geomspace(1.0, 1e6, 13))
        self.assertAlmostEqual(rejilla[-1], 1.0, delta=1e-9)


class MatrizInversionTest(SimpleTestCase):
    """Tests para las inversiones en todas las familias, α y puntos"""

    def test_cola_desde_h(self):
        """Test para F̄ recuperada de H_α en cada punto de la rejilla"""
        for m, p in casos():
            for x in REJILLA:
                with self.subTest(modelo=m.name, alpha=p.alpha, x=x):
                    valor = TransformService.invert_tail_from_H(m, p, x)
                    self.assertAlmostEqual(valor, float(m.tail(x)), delta=1e-8)

    def test_cola_desde_h_en_puntos_lejanos(self):
        """Test para la exponencial con α = 1/2 lejos de la masa y cerca del origen"""
        m = modelo('exponential', rate=1.0)
        p = TransformParams(0.5)
        for x in (0.156, 163840.0):
            with self.subTest(x=x):
                valor = TransformService.invert_tail_from_H(m, p, x)
                self.assertAlmostEqual(valor, math.exp(-x), delta=1e-8)

    def test_f_desde_g(self):
        """Test para F recuperada de G_α en los modelos con densidad"""
        for m, p in casos(suaves=True):
            for x in REJILLA:
                with self.subTest(modelo=m.name, alpha=p.alpha, x=x):
                    esperado = float(m.cdf(x))
                    valor = TransformService.invert_F_from_G(m, p, x)
                    self.assertAlmostEqual(valor, esperado, delta=1e-6 * max(esperado, 1e-3))

    def test_derivada_numerica_frente_a_identidad(self):
        """Test para G′_α por diferencia central frente a αx^{−α−1}H_α"""
        for m, p in casos(suaves=True):
            with self.subTest(modelo=m.name, alpha=p.alpha):
                exacta = TransformService.evaluate_grid(m, 'Gprime', p, REJILLA)
                numerica = [TransformService.central_difference_gprime(m, p, x) for x in REJILLA]
                np.testing.assert_allclose(numerica, exacta, rtol=1e-6, atol=1e-10)
