import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from internal.CoreModel import ComplexPredicateSpec, PredicateSpec, SimulationConfig  # noqa: E402


def make_config(n=2, selectivity=0.5, mu=0.7, var=0.04, gamma=0.0, **kwargs) -> SimulationConfig:
    predicates = tuple(PredicateSpec(f"p{j + 1}", selectivity, mu, var) for j in range(n))
    return SimulationConfig(complex_predicate=ComplexPredicateSpec(predicates, gamma), **kwargs)


@pytest.fixture
def two_predicate_config() -> SimulationConfig:
    return make_config(trials=20, seed=11, beta_weights=(0.1, 1.0, 10.0))


@pytest.fixture
def config_document() -> dict:
    return {
        "complex_predicate": {
            "predicates": [
                {"id": "p1", "selectivity": 0.5, "accuracy_mean": 0.7, "accuracy_var": 0.04},
                {"id": "p2", "selectivity": 0.4, "accuracy_mean": 0.8},
            ],
            "penalty": 0.2,
        },
        "budget_b": 5,
        "beta_weights": [1.0, 10.0],
        "trials": 50,
    }
