import pytest

from hhlink import encoder, pairgen, synth

TEST_KEY = b"unit-test-key"


@pytest.fixture(scope="session")
def small_corpus():
    """~270 profiles in 80 clusters with ground truth, fixed seed."""
    originals = synth.generate_roster(80, seed=11)
    return synth.generate_corpus(
        originals,
        synth.default_size_distribution(),
        synth.default_pattern_distribution(),
        seed=11,
    )


@pytest.fixture(scope="session")
def encoded64(small_corpus):
    profiles, _, _ = small_corpus
    cfg = encoder.EncoderConfig(key=TEST_KEY, m=64)
    return [encoder.encode_profile(p, cfg) for p in profiles]


@pytest.fixture(scope="session")
def labeled_table(small_corpus, encoded64):
    _, truth, _ = small_corpus
    return pairgen.label_pairs(encoded64, truth)
