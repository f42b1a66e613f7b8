import pytest
from hypothesis import HealthCheck, settings

from strategies import fields_table

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow,
                                                 HealthCheck.data_too_large])
settings.load_profile("default")


@pytest.fixture(scope="session")
def table():
    return fields_table()


@pytest.fixture(scope="session")
def suite_report():
    from tensorcert.derivation import builtin_paper_suite
    return builtin_paper_suite()
