import pytest

from xmeat.registry import build_test_suite, load_registry
from xmeat.store import read_bundle

from pathlib import Path

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def registry():
    return load_registry(FIXTURES / "registry")


@pytest.fixture(scope="session")
def suite(registry):
    return build_test_suite(registry, attr_variant="controlled")


@pytest.fixture(scope="session")
def classic_suite(registry):
    return build_test_suite(registry, attr_variant="classic")


@pytest.fixture(scope="session")
def bundle_a():
    return read_bundle(FIXTURES / "bundles" / "model_a")


@pytest.fixture(scope="session")
def all_bundles():
    bdir = FIXTURES / "bundles"
    return [read_bundle(p) for p in sorted(bdir.iterdir())]


def random_instance(rng, n_targets=None, n_attrs=None, dim=None):
    """Random (X, Y, A, B) matrices for association-test oracles."""
    dim = dim or int(rng.integers(3, 17))
    n_targets = n_targets or int(rng.integers(2, 9))
    n_attrs = n_attrs or int(rng.integers(2, 26))
    make = lambda n: rng.normal(size=(n, dim))
    return make(n_targets), make(n_targets), make(n_attrs), make(n_attrs)
