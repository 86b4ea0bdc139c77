import numpy as np
import pytest

from cosmargin.data import Dataset, Embedding, SynthConfig, Trial, gen_synthetic, gen_trials


def small_dataset():
    return Dataset(
        2,
        ["a", "a", "b", "b", "c"],
        ["u0", "u1", "u2", "u3", "u4"],
        [[1, 0], [0.9, 0.1], [0, 1], [0.1, 0.9], [1, 1]],
    )


class TestDataset:
    def test_indexes(self):
        ds = small_dataset()
        assert ds.by_speaker == {"a": (0, 1), "b": (2, 3), "c": (4,)}
        assert ds.by_utterance["u3"] == 3
        assert ds.speakers == ("a", "b", "c")
        assert ds[1].speaker_id == "a"
        np.testing.assert_array_equal(ds.vector_of("u2"), [0, 1])

    def test_duplicate_utterance_rejected(self):
        with pytest.raises(ValueError, match="'u0'"):
            Dataset(1, ["a", "b"], ["u0", "u0"], [[1.0], [2.0]])

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError, match="zero-norm.*'u1'"):
            Dataset(2, ["a", "b"], ["u0", "u1"], [[1, 0], [0, 0]])

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            Dataset(3, ["a"], ["u0"], [[1.0, 2.0]])

    def test_vectors_are_immutable(self):
        ds = small_dataset()
        with pytest.raises(ValueError):
            ds.vectors[0, 0] = 7.0

    def test_subset_by_speakers(self):
        ds = small_dataset()
        sub = ds.subset_by_speakers(["b", "c"])
        assert sub.utterance_ids == ("u2", "u3", "u4")
        assert sub.speakers == ("b", "c")
        with pytest.raises(ValueError, match="unknown speakers"):
            ds.subset_by_speakers(["nope"])

    def test_from_embeddings_roundtrip(self):
        ds = small_dataset()
        again = Dataset.from_embeddings(2, list(ds))
        assert again == ds

    def test_empty_dataset(self):
        ds = Dataset(4, [], [], [])
        assert len(ds) == 0 and ds.dim == 4


class TestTrial:
    def test_self_trial_rejected(self):
        with pytest.raises(ValueError, match="self-trial"):
            Trial("u1", "u1", True)


class TestSynthConfig:
    def test_nuisance_bound(self):
        with pytest.raises(ValueError, match="nuisance_dims"):
            SynthConfig(n_speakers=2, utts_per_speaker=2, dim=3, nuisance_dims=4)

    def test_needs_two_utts(self):
        with pytest.raises(ValueError, match="utts_per_speaker"):
            SynthConfig(n_speakers=2, utts_per_speaker=1, dim=3)


class TestGenSynthetic:
    def test_counts_and_ids(self):
        ds = gen_synthetic(SynthConfig(n_speakers=5, utts_per_speaker=3, dim=4, seed=1))
        assert len(ds) == 15
        assert len(ds.speakers) == 5
        assert ds.speaker_ids[0] == "spk00000"
        assert ds.utterance_ids[-1] == "utt00000014"

    def test_determinism(self):
        cfg = SynthConfig(n_speakers=4, utts_per_speaker=2, dim=6, seed=42)
        a = gen_synthetic(cfg)
        b = gen_synthetic(cfg)
        assert a == b

    def test_seed_changes_data(self):
        base = SynthConfig(n_speakers=4, utts_per_speaker=2, dim=6, seed=1)
        other = SynthConfig(n_speakers=4, utts_per_speaker=2, dim=6, seed=2)
        assert gen_synthetic(base) != gen_synthetic(other)

    def test_nuisance_variance_ratio(self):
        # within-speaker variance on nuisance coords should be ~ scale^2 larger
        cfg = SynthConfig(
            n_speakers=200, utts_per_speaker=10, dim=10,
            nuisance_dims=5, nuisance_scale=10.0, seed=3,
        )
        ds = gen_synthetic(cfg)
        centered = np.empty_like(ds.vectors)
        for idx in ds.by_speaker.values():
            rows = ds.vectors[list(idx)]
            centered[list(idx)] = rows - rows.mean(axis=0)
        per_coord = centered.var(axis=0)
        ratio = per_coord[:5].mean() / per_coord[5:].mean()
        assert 80.0 <= ratio <= 120.0


class TestGenTrials:
    def test_counts_and_labels(self):
        ds = gen_synthetic(SynthConfig(n_speakers=6, utts_per_speaker=4, dim=3, seed=2))
        trials = gen_trials(ds, n_target=100, n_nontarget=400, seed=5)
        assert len(trials) == 500
        assert sum(t.is_target for t in trials) == 100

    def test_label_consistency(self):
        ds = gen_synthetic(SynthConfig(n_speakers=6, utts_per_speaker=4, dim=3, seed=2))
        trials = gen_trials(ds, n_target=150, n_nontarget=300, seed=6)
        for t in trials:
            same = (
                ds.speaker_ids[ds.by_utterance[t.enroll_utt]]
                == ds.speaker_ids[ds.by_utterance[t.test_utt]]
            )
            assert same == t.is_target
            assert t.enroll_utt != t.test_utt

    def test_keys_are_distinct(self):
        ds = gen_synthetic(SynthConfig(n_speakers=5, utts_per_speaker=5, dim=2, seed=9))
        trials = gen_trials(ds, n_target=90, n_nontarget=400, seed=1)
        keys = {(t.enroll_utt, t.test_utt) for t in trials}
        assert len(keys) == len(trials)

    def test_single_speaker_unsatisfiable(self):
        ds = Dataset(1, ["a", "a"], ["u0", "u1"], [[1.0], [2.0]])
        with pytest.raises(ValueError, match="fewer than 2 speakers"):
            gen_trials(ds, n_target=1, n_nontarget=1, seed=0)

    def test_no_pairs_unsatisfiable(self):
        ds = Dataset(1, ["a", "b"], ["u0", "u1"], [[1.0], [2.0]])
        with pytest.raises(ValueError, match="same-speaker pairs"):
            gen_trials(ds, n_target=1, n_nontarget=0, seed=0)

    def test_determinism(self):
        ds = gen_synthetic(SynthConfig(n_speakers=5, utts_per_speaker=3, dim=2, seed=4))
        assert gen_trials(ds, 20, 30, seed=8) == gen_trials(ds, 20, 30, seed=8)
