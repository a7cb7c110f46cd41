"""Text formats: exact round-trips and malformed-file rejection."""

import numpy as np
import pytest

from gleak import (
    Alphabet,
    Channel,
    GainFunction,
    Prior,
    SampleSet,
    ValidationError,
    data_preprocess,
    identity_gain,
    joint_from,
    read_channel,
    read_gain,
    read_prior,
    read_samples,
    read_weighted,
    sample_joint,
    stream,
    write_channel,
    write_gain,
    write_prior,
    write_samples,
    write_weighted,
)


class TestPriorFormat:
    def test_round_trip_is_exact(self, tmp_path):
        probs = np.array([1 / 3, 1 / 7, 1 - 1 / 3 - 1 / 7])
        prior = Prior(Alphabet.integers(3), probs)
        path = tmp_path / "prior.txt"
        write_prior(prior, path)
        back = read_prior(path)
        assert (back.probs == prior.probs).all()

    def test_alphabet_preserved_when_supplied(self, tmp_path):
        names = Alphabet(("alice", "bob"))
        prior = Prior(names, np.array([0.25, 0.75]))
        path = tmp_path / "prior.txt"
        write_prior(prior, path)
        back = read_prior(path, names)
        assert back.alphabet == names

    def test_multiline_rejected(self, tmp_path):
        path = tmp_path / "prior.txt"
        path.write_text("0.5 0.5\n0.1 0.9\n")
        with pytest.raises(ValidationError, match="one line"):
            read_prior(path)

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "prior.txt"
        path.write_text("0.5 zero.five\n")
        with pytest.raises(ValidationError, match="malformed"):
            read_prior(path)


class TestChannelFormat:
    def test_round_trip_is_exact(self, tmp_path):
        rows = np.array([[0.8, 0.2], [1 / 3, 2 / 3], [0.05, 0.95]])
        channel = Channel(Alphabet.integers(3), Alphabet.integers(2, "y"), rows)
        path = tmp_path / "chan.txt"
        write_channel(channel, path)
        back = read_channel(path)
        assert (back.rows == channel.rows).all()
        assert back.input.size == 3 and back.output.size == 2

    def test_header_checked(self, tmp_path):
        path = tmp_path / "chan.txt"
        path.write_text("two 2\n0.5 0.5\n")
        with pytest.raises(ValidationError, match="header"):
            read_channel(path)

    def test_row_count_checked(self, tmp_path):
        path = tmp_path / "chan.txt"
        path.write_text("2 2\n0.5 0.5\n")
        with pytest.raises(ValidationError, match="matrix rows"):
            read_channel(path)

    def test_row_width_checked(self, tmp_path):
        path = tmp_path / "chan.txt"
        path.write_text("2 2\n0.5 0.5\n1.0\n")
        with pytest.raises(ValidationError, match="width"):
            read_channel(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "chan.txt"
        path.write_text("\n\n")
        with pytest.raises(ValidationError, match="empty"):
            read_channel(path)

    def test_nonstochastic_content_rejected_by_domain_type(self, tmp_path):
        path = tmp_path / "chan.txt"
        path.write_text("1 2\n0.9 0.3\n")
        with pytest.raises(ValidationError):
            read_channel(path)


class TestGainFormat:
    def test_round_trip_preserves_original_units(self, tmp_path):
        matrix = np.array([[1.0, -2.0], [0.5, 3.0]])
        gain = GainFunction(
            Alphabet.integers(2, "w"), Alphabet.integers(2), matrix
        )
        path = tmp_path / "gain.txt"
        write_gain(gain, path)
        back = read_gain(path)
        assert (back.original() == matrix).all()
        assert back.shift == gain.shift
        assert back.range == gain.range

    def test_value_range_override(self, tmp_path):
        gain = identity_gain(Alphabet.integers(2))
        path = tmp_path / "gain.txt"
        write_gain(gain, path)
        back = read_gain(path, value_range=(0.0, 4.0))
        assert back.range == (0.0, 4.0)

    def test_header_shape_mismatch(self, tmp_path):
        path = tmp_path / "gain.txt"
        path.write_text("2 3\n1 0 0\n0 1\n")
        with pytest.raises(ValidationError, match="width"):
            read_gain(path)


class TestSampleFormat:
    def make_samples(self):
        X = Alphabet(("north", "south"))
        xs = np.array([0, 1, 1, 0])
        ys = np.array([[3], [1], [4], [1]])
        return SampleSet(X, xs, ys)

    def test_round_trip(self, tmp_path):
        samples = self.make_samples()
        path = tmp_path / "samples.csv"
        write_samples(samples, path)
        back = read_samples(path, samples.secrets)
        assert (back.xs == samples.xs).all()
        assert (back.ys == samples.ys).all()

    def test_tuple_observables_round_trip(self, tmp_path):
        X = Alphabet.integers(2)
        ys = np.array([[1, -2, 3], [0, 0, 7]])
        samples = SampleSet(X, np.array([0, 1]), ys)
        path = tmp_path / "samples.csv"
        write_samples(samples, path)
        back = read_samples(path, X)
        assert (back.ys == ys).all()
        assert path.read_text().splitlines()[0] == "0,1|-2|3"

    def test_sampled_set_round_trip(self, tmp_path, two_secret_example):
        prior, channel = two_secret_example
        samples = sample_joint(joint_from(prior, channel), 200, stream(0, "t/io"))
        path = tmp_path / "samples.csv"
        write_samples(samples, path)
        back = read_samples(path, prior.alphabet)
        assert (back.xs == samples.xs).all() and (back.ys == samples.ys).all()

    def test_unknown_label_rejected(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("east,3\n")
        with pytest.raises(ValidationError):
            read_samples(path, Alphabet(("north", "south")))

    def test_wrong_column_count_rejected(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("north,3,9\n")
        with pytest.raises(ValidationError, match="x_label"):
            read_samples(path, Alphabet(("north", "south")))

    def test_ragged_widths_rejected(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("north,1|2\nsouth,3\n")
        with pytest.raises(ValidationError, match="widths"):
            read_samples(path, Alphabet(("north", "south")))

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("")
        with pytest.raises(ValidationError, match="no samples"):
            read_samples(path, Alphabet(("north", "south")))

    def test_malformed_encoding_rejected(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("north,3|x\n")
        with pytest.raises(ValidationError, match="encoding"):
            read_samples(path, Alphabet(("north", "south")))


class TestWeightedFormat:
    def make_weighted(self, two_secret_example):
        prior, channel = two_secret_example
        gain = identity_gain(prior.alphabet)
        samples = sample_joint(joint_from(prior, channel), 300, stream(1, "t/io/w"))
        return data_preprocess(samples, gain), gain

    def test_round_trip(self, tmp_path, two_secret_example):
        weighted, gain = self.make_weighted(two_secret_example)
        path = tmp_path / "weighted.csv"
        write_weighted(weighted, path)
        back = read_weighted(path, gain.guesses)
        assert (back.ws == weighted.ws).all()
        assert (back.ys == weighted.ys).all()
        assert (back.weights == weighted.weights).all()
        assert back.total_weight == weighted.total_weight

    def test_wrong_column_count_rejected(self, tmp_path):
        path = tmp_path / "weighted.csv"
        path.write_text("w0,3\n")
        with pytest.raises(ValidationError, match="w_label"):
            read_weighted(path, Alphabet.integers(2, "w"))

    def test_non_integer_weight_rejected(self, tmp_path):
        path = tmp_path / "weighted.csv"
        path.write_text("w0,3,1.5\n")
        with pytest.raises(ValidationError, match="integer"):
            read_weighted(path, Alphabet.integers(2, "w"))

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "weighted.csv"
        path.write_text("\n")
        with pytest.raises(ValidationError, match="no entries"):
            read_weighted(path, Alphabet.integers(2, "w"))
