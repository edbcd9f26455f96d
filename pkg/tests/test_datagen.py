import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from budgetlearn.core import ConfigurationError, RngStream, standardize
from budgetlearn.datagen import GenSpec, PROFILES, class_templates, generate, profile
from budgetlearn.diagnostics import kmeans_diagnose
from budgetlearn.model import Hyper, predict, train
from budgetlearn.core import HUMAN, Entry, LabeledSet


def test_profile_shapes():
    plasma = generate(profile("plasma-like"))
    assert plasma.features.shape == (114, 1868)
    assert np.bincount(plasma.labels).tolist() == [27, 27, 30, 30]
    pathogen = generate(profile("pathogen-like"))
    assert pathogen.features.shape == (160, 744)
    assert np.bincount(pathogen.labels).tolist() == [40, 40, 40, 40]
    assert all(generate(s).num_classes == 4 for s in PROFILES.values())


def test_deterministic_and_seed_sensitive():
    a = generate(profile("pathogen-like", seed=3))
    b = generate(profile("pathogen-like", seed=3))
    c = generate(profile("pathogen-like", seed=4))
    assert np.array_equal(a.features, b.features) and np.array_equal(a.labels, b.labels)
    assert not np.array_equal(a.features, c.features)


def test_zero_noise_rows_equal_template():
    spec = GenSpec(noise_std=0.0, counts=(5, 5, 5, 5), dim=60)
    ds = generate(spec)
    tmpl = class_templates(spec)
    np.testing.assert_array_equal(ds.features, tmpl[ds.labels])
    assert kmeans_diagnose(ds, 4, RngStream(0)).agreement == 1.0


def test_zero_shift_makes_classes_identical():
    tmpl = class_templates(GenSpec(peak_shift=0.0))
    assert np.allclose(tmpl, tmpl[0])


def _holdout_accuracy(spec):
    ds = generate(spec)
    idx = np.random.default_rng(0).permutation(ds.num_samples)
    tr, te = idx[: ds.num_samples // 2], idx[ds.num_samples // 2:]
    local = standardize(ds, tr)
    lab = LabeledSet(Entry(int(i), int(ds.labels[i]), HUMAN, 1.0) for i in tr)
    model = train(lab, local, Hyper(epochs=150))
    return float(np.mean(predict(model, te, local) == ds.labels[te]))


def test_separability_grows_with_shift():
    accs = [_holdout_accuracy(GenSpec(dim=120, peaks_per_class=8, peak_width=8.0, peak_shift=s,
                                      noise_std=0.6, counts=(30,) * 4)) for s in (0.0, 1.0, 4.0)]
    assert accs[0] < 0.45
    assert accs[0] < accs[1] < accs[2]


def test_cluster_agreement_profiles():
    well = generate(profile("pathogen-like", peak_shift=4.0, noise_std=0.3))
    poor = generate(profile("pathogen-like"))
    assert kmeans_diagnose(well, 4, RngStream(0)).agreement >= 0.9
    assert kmeans_diagnose(poor, 4, RngStream(0)).agreement <= 0.6


@pytest.mark.parametrize("bad", [
    dict(num_classes=1, counts=(5,)),
    dict(counts=(5, 5)),
    dict(counts=(5, 0, 5, 5)),
    dict(dim=4, peaks_per_class=3),
    dict(noise_std=-1.0),
    dict(peak_width=0.0),
    dict(kind="spikes"),
])
def test_spec_errors(bad):
    with pytest.raises(ConfigurationError):
        GenSpec(**bad)


def test_unknown_profile():
    with pytest.raises(ConfigurationError, match="plasma-like"):
        profile("nope")


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), c=st.integers(2, 5), per=st.integers(1, 6))
def test_labels_follow_counts(seed, c, per):
    ds = generate(GenSpec(num_classes=c, counts=(per,) * c, dim=30, seed=seed))
    assert ds.fully_labeled
    assert np.bincount(ds.labels, minlength=c).tolist() == [per] * c
    assert np.all(np.isfinite(ds.features))
