import numpy as np
import pytest

from eiregret import verify
from eiregret.verify import EI_CHECKS, GP_CHECKS, LEMMA_CHECKS, format_table, run_suite

PROBED = ["tau_positive", "tau_monotone", "tau_derivative_is_cdf", "cdf_exceeds_tau_reflected", "ei_bounds",
          "mu_bounded_ei", "mills_ratio_tail", "ei_monotone_ab"]


@pytest.mark.parametrize("name", PROBED)
def test_lemma_check_clean_with_enough_probes(name):
    probes, violations, _ = LEMMA_CHECKS[name]()
    assert probes >= 10_000
    assert violations == 0


@pytest.mark.parametrize("name", ["ladder_inequality", "beta_spot_value", "mesh_cardinality_identity",
                                  "parameters_nondecreasing"])
def test_theory_checks_clean(name):
    assert LEMMA_CHECKS[name]()[1] == 0


@pytest.mark.parametrize("name", sorted(EI_CHECKS))
def test_ei_checks_clean(name):
    assert EI_CHECKS[name]()[1] == 0


def test_gp_checks_clean():
    for fn in GP_CHECKS.values():
        assert fn()[1] == 0


def test_checks_detect_a_broken_tau(monkeypatch):
    monkeypatch.setattr(verify, "tau", lambda z: np.asarray(z) * 0.5 + 0.1)
    assert verify.check_tau_positive()[1] > 0
    assert verify.check_tau_derivative()[1] > 0


def test_checks_detect_a_broken_ei(monkeypatch):
    monkeypatch.setattr(verify, "ei_tradeoff", lambda a, b: np.maximum(a, 0.0))
    assert verify.check_ei_monotone()[1] > 0


def test_dense_oracle_agrees_with_itself_on_trivial_case():
    from eiregret.gp import Dataset
    from eiregret.kernels import KernelSpec

    mean, var = verify.dense_posterior(Dataset([[0.5]], [1.0]), KernelSpec("se", 0.3), 0.25, np.array([[0.5]]))
    assert mean[0] == pytest.approx(0.8) and var[0] == pytest.approx(0.2)


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("physics")


def test_table_format():
    rows = run_suite("ei")
    text = format_table(rows)
    assert text.splitlines()[0].split()[:2] == ["suite", "check"]
    assert len(text.splitlines()) == len(EI_CHECKS) + 1
