import numpy as np
import pytest

from biccert import bell, bic


@pytest.fixture(scope="session")
def weyl_povm_d2():
    return bic.construct_weyl_bic(2, bic.geometric_fiducial(2, 0.3, 0.137))


@pytest.fixture(scope="session")
def weyl_povm_d3():
    return bic.construct_weyl_bic(3, bic.geometric_fiducial(3, 0.3, 0.137))


@pytest.fixture(scope="session")
def weyl_povm_d4():
    return bic.construct_weyl_bic(4, bic.geometric_fiducial(4, 0.3, 0.137))


@pytest.fixture(scope="session")
def reference_d2(weyl_povm_d2):
    return bell.reference_strategy(weyl_povm_d2), bic.gram(weyl_povm_d2)


@pytest.fixture(scope="session")
def reference_d3(weyl_povm_d3):
    return bell.reference_strategy(weyl_povm_d3), bic.gram(weyl_povm_d3)


@pytest.fixture(scope="session")
def reference_d4(weyl_povm_d4):
    return bell.reference_strategy(weyl_povm_d4), bic.gram(weyl_povm_d4)


@pytest.fixture(scope="session")
def sic3_povm():
    return bic.construct_weyl_bic(3, np.array([0.0, 1.0, -1.0]) / np.sqrt(2.0))
