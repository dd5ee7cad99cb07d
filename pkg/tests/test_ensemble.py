import math

import numpy as np
import pytest
from scipy import stats

from revcyc.ensemble import (
    EnsembleConfig,
    sample_ensemble,
    sample_generator,
    sample_generators,
    sample_spectra,
)
from revcyc.errors import ContractViolation


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(dim=1), dict(dim=3, stiffness=0.0), dict(dim=3, count=0), dict(dim=3, seed=-1), dict(dim=3, seed=2**64)],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ContractViolation):
            EnsembleConfig(**kwargs)

    def test_entry_std_3x3(self):
        # density exp(-3 A a^2) has variance 1/(6A)
        assert EnsembleConfig(dim=3, stiffness=2.0).entry_std ** 2 == pytest.approx(1 / 12)


class TestSampling:
    def test_index_bounds(self):
        cfg = EnsembleConfig(dim=3, count=5)
        with pytest.raises(ContractViolation):
            sample_generator(cfg, 5)

    def test_order_independent(self):
        cfg = EnsembleConfig(dim=7, count=50, seed=9)
        full = sample_generators(cfg)
        assert sample_generator(cfg, 31).entries == tuple(full[31])
        np.testing.assert_array_equal(sample_generators(cfg, 10, 20), full[10:20])

    def test_threads_do_not_change_output(self):
        cfg = EnsembleConfig(dim=5, count=1000, seed=3)
        np.testing.assert_array_equal(sample_generators(cfg, threads=1), sample_generators(cfg, threads=4))

    def test_seeds_differ(self):
        a = sample_generators(EnsembleConfig(dim=4, count=3, seed=1))
        b = sample_generators(EnsembleConfig(dim=4, count=3, seed=2))
        assert not np.array_equal(a, b)

    def test_large_stiffness_concentrates(self):
        g = sample_generators(EnsembleConfig(dim=6, stiffness=1e12, count=100))
        assert np.max(np.abs(g)) < 1e-4

    def test_single(self):
        out = list(sample_ensemble(EnsembleConfig(dim=4, count=1)))
        assert len(out) == 1

    def test_stream_deterministic(self):
        cfg = EnsembleConfig(dim=5, count=5000, seed=11)
        a = list(sample_ensemble(cfg))
        b = list(sample_ensemble(cfg))
        assert a == b
        gens, spectra = sample_spectra(cfg)
        assert a[4321][0].entries == tuple(gens[4321])
        assert a[4321][1] == spectra[4321]


@pytest.mark.parametrize("dim", [3, 15])
def test_entry_moments(dim):
    cfg = EnsembleConfig(dim=dim, stiffness=1.0, count=20000, seed=dim)
    a = sample_generators(cfg)
    var = 1.0 / (2 * cfg.stiffness * dim)
    assert abs(a.mean()) < 5 * math.sqrt(var) / math.sqrt(a.size)
    assert a.var() == pytest.approx(var, rel=0.03)
    # each column separately as well
    assert np.all(np.abs(a.var(axis=0) / var - 1) < 0.05)


def test_trivial_eigenvalue_gaussian():
    A = 1.0
    cfg = EnsembleConfig(dim=15, stiffness=A, count=20000, seed=4)
    _, spectra = sample_spectra(cfg)
    e1 = spectra.trivial
    assert e1.var() == pytest.approx(1 / (2 * A), rel=0.03)
    d = stats.kstest(e1, stats.norm(scale=math.sqrt(1 / (2 * A))).cdf).statistic
    assert d < 0.02
