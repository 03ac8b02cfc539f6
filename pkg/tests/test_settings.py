import unittest

import structural_derivative as sd
from structural_derivative.settings import (
    DEFAULT_LATTICE_TOLERANCE,
    DEFAULT_QUANTUM_TOLERANCE,
    Settings,
)
from structural_derivative.timescale import QuantumScale, UniformGrid


class TestSettings(unittest.TestCase):
    def tearDown(self) -> None:
        sd.set_quantum_tolerance(DEFAULT_QUANTUM_TOLERANCE)
        sd.set_lattice_tolerance(DEFAULT_LATTICE_TOLERANCE)

    def test_get_is_cached(self) -> None:
        self.assertIs(Settings.get(), Settings.get())

    def test_set_quantum_tolerance(self) -> None:
        sd.set_quantum_tolerance(1e-6)
        self.assertEqual(Settings.get().quantum_tolerance, 1e-6)
        self.assertTrue(QuantumScale(2).contains(8 * (1 + 1e-8)))

        sd.set_quantum_tolerance(DEFAULT_QUANTUM_TOLERANCE)
        self.assertFalse(QuantumScale(2).contains(8 * (1 + 1e-8)))

    def test_explicit_tolerance_wins(self) -> None:
        sd.set_quantum_tolerance(1e-6)
        self.assertFalse(QuantumScale(2, tolerance=1e-12).contains(8 * (1 + 1e-8)))

    def test_set_lattice_tolerance(self) -> None:
        grid = UniformGrid(0.1)
        self.assertTrue(grid.contains(0.3))
        sd.set_lattice_tolerance(1e-20)
        self.assertFalse(grid.contains(0.3))

    def test_rejects_non_positive(self) -> None:
        with self.assertRaises(ValueError):
            sd.set_quantum_tolerance(0.0)
        with self.assertRaises(ValueError):
            sd.set_lattice_tolerance(-1.0)
