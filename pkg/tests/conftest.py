import os

import numpy as np
import pytest

import qarrival as qa
from qarrival import oracle as orc
from qarrival import wavepacket as wp

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def bimodal_amplitude():
    """Two radial gaussian lobes at p = 3 and p = 6, tabulated."""
    grid = np.linspace(1.5, 7.5, 1201)
    vals = (np.exp(-((grid - 3.0) ** 2) / (4 * 0.15 ** 2))
            + np.exp(-((grid - 6.0) ** 2) / (4 * 0.15 ** 2)))
    return wp.tabulated(grid, vals)


def tabulated_gaussian_amplitude():
    """The (5, 0.5) isotropic gaussian sampled onto a grid."""
    grid = np.linspace(1.0, 9.0, 1601)
    vals = np.exp(-((grid - 5.0) ** 2) / (4 * 0.5 ** 2))
    return wp.tabulated(grid, vals)


@pytest.fixture(scope="session")
def source():
    return qa.EmissionEvent(x0=[0.0, 0.0, 0.0], t0=0.0, mass=1.0)


@pytest.fixture(scope="session")
def iso_amp():
    return qa.isotropic_gaussian(5.0, 0.5)


@pytest.fixture(scope="session")
def narrow_amp():
    return qa.isotropic_gaussian(5.0, 0.05)


@pytest.fixture(scope="session")
def sep_amp():
    return qa.separable_gaussian(5.0, 0.5, [0.0, 0.0, 1.0], 0.0375)


@pytest.fixture(scope="session")
def bimodal_amp():
    return bimodal_amplitude()


@pytest.fixture(scope="session")
def standard_det(source):
    return qa.sphere_detector([0.0, 0.0, 20.0], 0.5, source)


@pytest.fixture(scope="session")
def standard_curve(iso_amp, standard_det, source):
    # fine pinned step: the closed-form/numerical evolution cross-check needs it
    return qa.build_entry_curve(iso_amp, standard_det, source,
                                qa.QuadratureSpec(dt=0.002))


@pytest.fixture(scope="session")
def narrow_curve(narrow_amp, source):
    return qa.point_detector_curve(narrow_amp, [0.0, 0.0, 100.0], source)


@pytest.fixture(scope="session")
def oracle_reports():
    return orc.load_reports(os.path.join(FIXTURES_DIR, "oracle_reports.json"))
