import pytest

from widthplan import domains, ground, parse_domain, parse_problem
from widthplan.features import parse_features
from widthplan.sketches import parse_sketch


def ground_bundle(bundle):
    return ground(parse_domain(bundle.domain_text), parse_problem(bundle.problem_text))


def bundle_features(bundle):
    return parse_features(bundle.features_text)


def bundle_sketch(bundle, name="policy"):
    return parse_sketch(bundle.sketches[name])


@pytest.fixture(scope="session")
def qclear2():
    bundle = domains.blocks_clear(2)
    return ground_bundle(bundle), bundle


@pytest.fixture(scope="session")
def delivery_small():
    bundle = domains.delivery(3, 3, [3, 8], target=1, start=5)
    return ground_bundle(bundle), bundle


@pytest.fixture(scope="session")
def delivery_one():
    bundle = domains.delivery(3, 3, [3], target=1, start=5)
    return ground_bundle(bundle), bundle


@pytest.fixture(scope="session")
def hanoi3():
    bundle = domains.hanoi_odd(3)
    return ground_bundle(bundle), bundle
