import numpy as np
import pytest

from corutv.synth import (
    NoisyLowRankSpec,
    RpcaInstanceSpec,
    gen_noisy_lowrank,
    gen_rpca_instance,
)


def test_noiseless_plant_matches_spectrum():
    spec = NoisyLowRankSpec(n=150, k=10, noise_coeff=0.0, seed=3)
    a, planted = gen_noisy_lowrank(spec)
    got = np.linalg.svd(a, compute_uv=False)  # oracle
    assert np.abs(got - planted).max() < 1e-10


def test_noise_perturbs_sigma_k_within_bound():
    # spectral perturbation of size noise_coeff * sigma_k bounds the shift
    spec = NoisyLowRankSpec(n=200, k=12, seed=5)
    a, planted = gen_noisy_lowrank(spec)
    got = np.linalg.svd(a, compute_uv=False)
    assert abs(got[11] - planted[11]) <= 0.15 * planted[11]


def test_gap_at_k_with_spectral_normalization():
    spec = NoisyLowRankSpec(n=150, k=10, seed=7)
    a, planted = gen_noisy_lowrank(spec)
    got = np.linalg.svd(a, compute_uv=False)
    assert got[9] / got[10] >= 9.0


def test_generator_bitwise_reproducible():
    spec = NoisyLowRankSpec(n=80, k=5, seed=11)
    a1, s1 = gen_noisy_lowrank(spec)
    a2, s2 = gen_noisy_lowrank(spec)
    assert np.array_equal(a1, a2)
    assert np.array_equal(s1, s2)


def test_ramp_span_variants():
    full = NoisyLowRankSpec(n=100, k=5, seed=1, ramp_span="full")
    rank = NoisyLowRankSpec(n=100, k=5, seed=1, ramp_span="rank")
    _, sf = gen_noisy_lowrank(full)
    _, sr = gen_noisy_lowrank(rank)
    assert sf[0] == sr[0] == 1.0
    assert sr[4] == pytest.approx(1e-9)
    assert sf[4] == pytest.approx(np.linspace(1.0, 1e-9, 100)[4])
    assert np.all(sf[5:] == 0.0) and np.all(sr[5:] == 0.0)


@pytest.mark.parametrize("norm", ["spectral", "frobenius", "entry"])
def test_noise_normalization_modes(norm):
    spec = NoisyLowRankSpec(n=90, k=4, seed=2, noise_normalization=norm)
    a, planted = gen_noisy_lowrank(spec)
    assert np.isfinite(a).all()


def test_noisy_spec_validation():
    with pytest.raises(ValueError):
        NoisyLowRankSpec(n=10, k=10)
    with pytest.raises(ValueError):
        NoisyLowRankSpec(n=10, k=2, sigma_min=2.0)
    with pytest.raises(ValueError):
        NoisyLowRankSpec(n=10, k=2, noise_normalization="unit")


# ---------------------------------------------------------------- rpca instances

def test_rpca_instance_rank_and_support():
    spec = RpcaInstanceSpec(n=100, k=6, s=500, seed=13)
    m, l_true, s_true = gen_rpca_instance(spec)
    assert np.linalg.matrix_rank(l_true, tol=1e-8) == 6  # oracle
    nz = s_true[s_true != 0]
    assert nz.size == 500
    assert set(np.unique(nz)) <= {-80.0, 80.0}
    assert np.array_equal(m, l_true + s_true)


def test_rpca_instance_zero_sparsity():
    spec = RpcaInstanceSpec(n=40, k=3, s=0, seed=1)
    m, l_true, s_true = gen_rpca_instance(spec)
    assert np.all(s_true == 0.0)
    assert np.array_equal(m, l_true)


def test_rpca_instance_exact_count_and_distinct_positions():
    spec = RpcaInstanceSpec(n=50, k=2, s=125, amplitude=3.5, seed=21)
    _, _, s_true = gen_rpca_instance(spec)
    assert int((s_true != 0).sum()) == 125
    assert set(np.unique(s_true[s_true != 0])) <= {-3.5, 3.5}


def test_rpca_instance_reproducible():
    spec = RpcaInstanceSpec(n=30, k=2, s=45, seed=8)
    m1, l1, s1 = gen_rpca_instance(spec)
    m2, l2, s2 = gen_rpca_instance(spec)
    assert np.array_equal(m1, m2)


def test_rpca_spec_validation():
    with pytest.raises(ValueError):
        RpcaInstanceSpec(n=10, k=0, s=5)
    with pytest.raises(ValueError):
        RpcaInstanceSpec(n=10, k=2, s=101)
    with pytest.raises(ValueError):
        RpcaInstanceSpec(n=10, k=2, s=5, amplitude=0.0)
