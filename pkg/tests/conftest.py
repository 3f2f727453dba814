import numpy as np
import pytest
import torch

from autorater.corpus import SyntheticSpec, build_schema, generate_synthetic_corpus

torch.set_num_threads(1)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """One visible pass/fail line per acceptance criterion."""
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__ == "test_acceptance":
        criterion = item.name.split("_")[1].upper() if item.name.startswith("test_a") else item.name
        status = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {criterion} {status} ({report.duration:.1f}s) :: {item.name}", flush=True)


@pytest.fixture(scope="session")
def small_corpus():
    """120 synthetic records with all three planted signals."""
    spec = SyntheticSpec(n=120, shares=(0.6, 0.25, 0.15, 0.0), tile_hw=(32, 48))
    records, truth = generate_synthetic_corpus(spec, seed=11)
    schema = build_schema(records, taxonomy=spec.schema_taxonomy())
    return spec, records, truth, schema


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
