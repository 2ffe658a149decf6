"""File format tests: network JSON, coordinate data files, traces, streaming."""

import numpy as np
import pytest

from samegibbs import IoError, ParseError, forward_sample, mask
from samegibbs.io import (
    FileSource,
    bundled_network_path,
    load_network_file,
    read_data,
    read_trace,
    write_data,
    write_network_file,
    write_trace,
)
from samegibbs.sampler import MatrixSource, Trace, TraceRecord

from helpers import random_cpts, random_network


class TestNetworkFiles:
    def test_round_trip_with_cpts(self, koller, tmp_path):
        net, truth = koller
        path = tmp_path / "net.json"
        write_network_file(path, net, truth)
        loaded_net, loaded_cpts = load_network_file(path)
        assert loaded_net == net
        assert all(np.array_equal(a, b) for a, b in zip(loaded_cpts.tables, truth.tables))

    def test_round_trip_without_cpts(self, koller, tmp_path):
        net, _ = koller
        path = tmp_path / "net.json"
        write_network_file(path, net)
        loaded_net, loaded_cpts = load_network_file(path)
        assert loaded_net == net
        assert loaded_cpts is None

    def test_bundled_koller_loads(self):
        net, truth = load_network_file(bundled_network_path("koller"))
        assert net.num_vars == 5
        assert truth is not None
        truth.validate()

    def test_unknown_bundled_name(self):
        with pytest.raises(IoError):
            bundled_network_path("nonexistent")

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError, match="does_not_exist"):
            load_network_file(tmp_path / "does_not_exist.json")

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n "cardinalities": [2,,2]\n}\n')
        with pytest.raises(ParseError, match=r":2:"):
            load_network_file(path)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "incomplete.json"
        path.write_text('{"cardinalities": [2, 2]}')
        with pytest.raises(ParseError, match="edges"):
            load_network_file(path)

    def test_wrong_cpt_length(self, tmp_path):
        path = tmp_path / "badcpt.json"
        path.write_text('{"cardinalities": [2], "edges": [], "cpts": [[0.5, 0.5, 0.5]]}')
        with pytest.raises(ParseError, match="entries"):
            load_network_file(path)

    def test_unnormalized_cpt_rejected(self, tmp_path):
        path = tmp_path / "badrow.json"
        path.write_text('{"cardinalities": [2], "edges": [], "cpts": [[0.9, 0.9]]}')
        with pytest.raises(ParseError):
            load_network_file(path)


class TestDataFiles:
    def test_round_trip_identity(self, koller, tmp_path):
        net, truth = koller
        data = mask(forward_sample(net, truth, 700, seed=1), 0.35, seed=2)
        path = tmp_path / "data.mm"
        write_data(path, data)
        loaded = read_data(path)
        assert (loaded.num_vars, loaded.num_cases, loaded.nnz) == (
            data.num_vars,
            data.num_cases,
            data.nnz,
        )
        np.testing.assert_array_equal(loaded.to_dense(), data.to_dense())

    def test_states_are_one_based_on_disk(self, koller, tmp_path):
        net, truth = koller
        data = forward_sample(net, truth, 20, seed=3)
        path = tmp_path / "data.mm"
        write_data(path, data)
        lines = path.read_text().splitlines()
        assert lines[0] == "5 20 100"
        body = np.array([[int(x) for x in line.split()] for line in lines[1:]])
        assert body.min() >= 1  # a stored value of 0 never occurs

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError, match="nope"):
            read_data(tmp_path / "nope.mm")

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.mm"
        path.write_text("5 cases\n")
        with pytest.raises(ParseError):
            read_data(path)


class TestFileSource:
    @pytest.mark.parametrize("minibatch_size", [1, 7, 100, 170, 512])
    def test_matches_matrix_source(self, koller, tmp_path, minibatch_size):
        net, truth = koller
        data = mask(forward_sample(net, truth, 512, seed=4), 0.5, seed=5)
        path = tmp_path / "data.mm"
        write_data(path, data)
        streamed = list(FileSource(path, minibatch_size))
        in_memory = list(MatrixSource(data, minibatch_size))
        assert len(streamed) == len(in_memory)
        for a, b in zip(streamed, in_memory):
            assert a.index == b.index
            assert a.num_real == b.num_real
            np.testing.assert_array_equal(a.values, b.values)
            np.testing.assert_array_equal(a.weights, b.weights)

    def test_small_chunks_exercise_buffering(self, koller, tmp_path, monkeypatch):
        import samegibbs.io as io_module

        net, truth = koller
        data = mask(forward_sample(net, truth, 300, seed=6), 0.4, seed=7)
        path = tmp_path / "data.mm"
        write_data(path, data)
        monkeypatch.setattr(io_module, "_ROWS_PER_CHUNK", 17)
        streamed = list(FileSource(path, 64))
        in_memory = list(MatrixSource(data, 64))
        for a, b in zip(streamed, in_memory):
            np.testing.assert_array_equal(a.values, b.values)

    def test_entirely_empty_file(self, koller, tmp_path):
        """A header-only file (everything masked) still streams and reads."""
        net, truth = koller
        empty = mask(forward_sample(net, truth, 50, seed=40), 1.0, seed=41)
        path = tmp_path / "empty.mm"
        write_data(path, empty)
        loaded = read_data(path)
        assert loaded.nnz == 0 and loaded.num_cases == 50
        blocks = list(FileSource(path, 20))
        assert [b.num_real for b in blocks] == [20, 20, 10]
        assert all(b.values.max() == -1 for b in blocks)

    def test_fully_missing_trailing_cases(self, tmp_path):
        path = tmp_path / "tail.mm"
        path.write_text("2 10 2\n1 1 2\n2 3 1\n")
        blocks = list(FileSource(path, 4))
        assert [b.num_real for b in blocks] == [4, 4, 2]
        assert blocks[1].values.min() == -1 and blocks[1].values.max() == -1

    def test_unsorted_file_rejected(self, tmp_path):
        path = tmp_path / "unsorted.mm"
        path.write_text("2 4 3\n1 3 1\n1 1 2\n2 2 1\n")
        with pytest.raises(ParseError, match="sorted"):
            list(FileSource(path, 2))

    def test_case_beyond_header_rejected(self, tmp_path):
        path = tmp_path / "overflow.mm"
        path.write_text("2 3 2\n1 1 1\n1 9 1\n")
        with pytest.raises(ParseError):
            list(FileSource(path, 2))

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError, match="gone"):
            FileSource(tmp_path / "gone.mm", 8)


class TestTraceFiles:
    def test_round_trip(self, tmp_path):
        trace = Trace()
        trace.records.append(TraceRecord(1, 0.5, 0.125, 4000.0, 2000))
        trace.records.append(TraceRecord(2, 1.0, None, None, 2000))
        path = tmp_path / "trace.csv"
        write_trace(path, trace)
        loaded = read_trace(path)
        assert loaded.records[0].pass_index == 1
        assert loaded.records[0].kl_avg == 0.125
        assert loaded.records[1].kl_avg is None
        assert loaded.records[1].vars_per_sec is None

    def test_header(self, tmp_path):
        path = tmp_path / "trace.csv"
        write_trace(path, Trace())
        assert path.read_text() == "pass,seconds,kl_avg,vars_per_sec\n"


class TestGeneratedFilesStreamIntoTraining:
    def test_end_to_end_streaming_run(self, tmp_path):
        """A masked random network's file trains without loading it whole."""
        rng = np.random.default_rng(8)
        net = random_network(rng, 6, 0.3, max_card=3)
        truth = random_cpts(net, rng)
        data = mask(forward_sample(net, truth, 400, seed=9), 0.5, seed=10)
        path = tmp_path / "data.mm"
        write_data(path, data)
        from samegibbs import SamplerConfig, run

        source = FileSource(path, 128)
        cpts, trace = run(net, source, SamplerConfig(minibatch_size=128, num_passes=3, seed=11), truth=truth)
        assert len(trace.records) == 3
        cpts.validate()
