"""
Tests para la construcción y validación de distribuciones
"""
import math
import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from colas.dist_models import DistribucionService
from colas.exceptions import DomainError, InputError
from colas.models import DistributionModel, FamilySpec, TransformKind
from colas.sampling import generador

SONDAS = np.concatenate([[0.0], np.geomspace(1e-3, 1e6, 60)])


def modelo(family, **params):
    return DistribucionService.make_model(FamilySpec(family, params))


class FamilySpecTest(SimpleTestCase):
    """Tests para la validación de parámetros de familia"""

    def test_parametro_obligatorio(self):
        """Test para pareto sin beta: el error nombra el parámetro"""
        with self.assertRaises(DomainError) as cm:
            FamilySpec('pareto', {}).clean()
        self.assertIn('beta', cm.exception.message_dict)
        self.assertEqual(cm.exception.code, 'domain')

    def test_parametros_no_positivos(self):
        """Test para parámetros fuera de dominio"""
        with self.assertRaises(DomainError):
            FamilySpec('pareto', {'beta': -1.0}).clean()
        with self.assertRaises(DomainError):
            FamilySpec('exponential', {'rate': 0.0}).clean()
        with self.assertRaises(DomainError):
            FamilySpec('degenerate', {'atom': math.inf}).clean()

    def test_pareto_log_potencia_mayor_que_beta(self):
        """Test para pareto_log con log_power > beta"""
        with self.assertRaises(DomainError) as cm:
            FamilySpec('pareto_log', {'beta': 1.0, 'log_power': 2.0}).clean()
        self.assertIn('log_power', cm.exception.message_dict)

    def test_familia_desconocida(self):
        """Test para una familia inexistente"""
        with self.assertRaises(ValidationError):
            FamilySpec('weibull', {'beta': 1.0}).clean()

    def test_empirica_sin_muestras(self):
        """Test para empirical sin samples ni samples_path"""
        with self.assertRaises(DomainError):
            FamilySpec('empirical', {}).clean()


class FamiliasAnaliticasTest(SimpleTestCase):
    """Tests para las familias con formas cerradas"""

    def setUp(self):
        """Configuración inicial para los tests"""
        self.modelos = [
            modelo('pareto', beta=1.0, scale=1.0),
            modelo('pareto', beta=3.0, scale=2.0),
            modelo('pareto_log', beta=2.5, log_power=1.0),
            modelo('pareto_log', beta=1.5, log_power=-2.0),
            modelo('boundary_rv', beta=2.0),
            modelo('exponential', rate=1.0),
            modelo('degenerate', atom=2.0),
        ]

    def test_invariantes_de_todas_las_familias(self):
        """Test para validate_model sobre las familias incluidas"""
        for m in self.modelos:
            with self.subTest(modelo=m.name):
                informe = DistribucionService.validate_model(m, SONDAS)
                self.assertTrue(informe.passed, [c.name for c in informe.failed()])

    def test_pareto_valores(self):
        """Test para la cola y la d.f. de pareto(1,1)"""
        m = self.modelos[0]
        self.assertEqual(float(m.tail(0.5)), 1.0)
        self.assertAlmostEqual(float(m.tail(10.0)), 0.1, places=15)
        self.assertAlmostEqual(float(m.cdf(10.0)), 0.9, places=15)
        self.assertEqual(float(m.cdf(0.0)), 0.0)
        self.assertEqual(m.breakpoints, (1.0,))
        self.assertEqual(m.tail_index, 1.0)
        self.assertEqual(m.moment_divergence_threshold, 1.0)

    def test_pareto_log_continua_en_el_cruce(self):
        """Test para la continuidad de la cola de pareto_log en su punto de ruptura"""
        m = self.modelos[2]
        cruce = m.breakpoints[0]
        self.assertAlmostEqual(float(m.tail(cruce)), 1.0, places=12)
        self.assertTrue(np.all(m.density(SONDAS) >= 0))
        self.assertIsNone(self.modelos[3].moment_divergence_threshold)

    def test_pareto_log_se_construye_en_todo_el_dominio(self):
        """Test para make_model con pareto_log y log_power de ambos signos"""
        for beta, potencia in [(1.5, 1.0), (1.5, 0.0), (0.5, 0.5), (3.0, -4.0), (10.0, 9.5)]:
            with self.subTest(beta=beta, log_power=potencia):
                m = modelo('pareto_log', beta=beta, log_power=potencia)
                cruce = m.breakpoints[0]
                self.assertTrue(0.0 < cruce < math.inf)
                self.assertAlmostEqual(float(m.tail(cruce)), 1.0, places=12)
                self.assertLess(float(m.tail(2.0 * cruce)), 1.0)

    def test_degenerada_continua_por_la_derecha(self):
        """Test para el átomo: F(a) = 1"""
        m = self.modelos[-1]
        self.assertEqual(float(m.cdf(2.0)), 1.0)
        self.assertEqual(float(m.tail(2.0)), 0.0)
        self.assertEqual(float(m.tail(1.999)), 1.0)
        self.assertFalse(m.has_density)

    def test_formas_cerradas(self):
        """Test para la tabla de formas cerradas de pareto(1,1) con α=2"""
        m = self.modelos[0]
        self.assertAlmostEqual(float(m.closed_form(TransformKind.W, 2.0)(10.0)), 9.5, places=12)
        self.assertAlmostEqual(float(m.closed_form(TransformKind.H, 2.0)(10.0)), 9.0, places=12)
        self.assertIsNone(m.closed_form(TransformKind.WBAR, 2.0))
        self.assertEqual(m.closed_form('moment', 2.0), math.inf)

    def test_muestreador_determinista(self):
        """Test para la reproducibilidad del muestreador por semilla"""
        for m in self.modelos:
            with self.subTest(modelo=m.name):
                a = m.sampler(generador(7), 50)
                b = m.sampler(generador(7), 50)
                np.testing.assert_array_equal(a, b)
                self.assertTrue(np.all(a > 0))

    def test_muestreador_pareto_log_sobre_el_cruce(self):
        """Test para que las muestras de pareto_log caigan en el soporte"""
        m = self.modelos[2]
        muestras = m.sampler(generador(3), 200)
        self.assertTrue(np.all(muestras >= m.breakpoints[0]))


class ModeloInvalidoTest(SimpleTestCase):
    """Tests para validate_model sobre un modelo que viola sus invariantes"""

    def test_cola_creciente(self):
        """Test para un modelo con cola creciente: se informa, no se lanza"""
        roto = DistributionModel(
            name='roto',
            cdf=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            tail=lambda x: np.minimum(1.0, np.asarray(x, dtype=float) / 10.0),
        )
        informe = DistribucionService.validate_model(roto, SONDAS)
        self.assertFalse(informe.passed)
        self.assertFalse(informe['tail_nonincreasing'].passed)
        self.assertFalse(informe['complement'].passed)
        self.assertIsNotNone(informe['tail_nonincreasing'].worst_x)

    def test_cdf_en_cero(self):
        """Test para F(0) ≠ 0 en clean()"""
        roto = DistributionModel(name='roto', cdf=lambda x: 0.5, tail=lambda x: 0.5)
        with self.assertRaises(DomainError):
            roto.clean()


class EmpiricaTest(SimpleTestCase):
    """Tests para distribuciones empíricas y el fichero de muestras"""

    def setUp(self):
        """Configuración inicial para los tests"""
        self.directorio = tempfile.TemporaryDirectory()
        self.ruta = Path(self.directorio.name)

    def tearDown(self):
        self.directorio.cleanup()

    def escribir(self, nombre, texto):
        ruta = self.ruta / nombre
        ruta.write_text(texto, encoding='utf-8')
        return ruta

    def test_suma_finita(self):
        """Test para H₁(3) = (1+2+2)/4 con las muestras {1,2,2,4}"""
        ruta = self.escribir('m.txt', '1\n2\n# comentario\n2\n\n4\n')
        m = modelo('empirical', samples_path=str(ruta))
        self.assertEqual(float(m.closed_form(TransformKind.H, 1.0)(3.0)), 1.25)
        self.assertEqual(float(m.tail(2.0)), 0.25)
        self.assertEqual(float(m.cdf(2.0)), 0.75)
        self.assertEqual(m.breakpoints, (1.0, 2.0, 4.0))
        self.assertEqual(m.closed_form('moment', 1.0), 2.25)

    def test_muestras_en_memoria(self):
        """Test para construir una empírica desde un array"""
        m = modelo('empirical', samples=np.array([3.0, 1.0]))
        np.testing.assert_array_equal(m.samples, [1.0, 3.0])
        informe = DistribucionService.validate_model(m, SONDAS)
        self.assertTrue(informe.passed)

    def test_muestra_negativa_nombra_la_linea(self):
        """Test para una muestra negativa en la línea 3"""
        ruta = self.escribir('m.txt', '1.0\n2\n-3\n')
        with self.assertRaises(InputError) as cm:
            DistribucionService.load_samples(ruta)
        self.assertIn('Línea 3', cm.exception.message_dict['samples_path'][0])

    def test_linea_no_numerica(self):
        """Test para una línea que no es un decimal"""
        ruta = self.escribir('m.txt', '1.0\nabc\n')
        with self.assertRaises(InputError) as cm:
            DistribucionService.load_samples(ruta)
        self.assertIn('Línea 2', cm.exception.message_dict['samples_path'][0])

    def test_fichero_vacio_o_inexistente(self):
        """Test para ficheros sin muestras o ilegibles"""
        with self.assertRaises(InputError):
            DistribucionService.load_samples(self.escribir('vacio.txt', '# nada\n'))
        with self.assertRaises(InputError):
            DistribucionService.load_samples(self.ruta / 'no_existe.txt')
