import math

import numpy as np
import pytest

from sparsebox.config import (
    ConfigError,
    RunConfig,
    config_hash,
    parse_config,
    serialize_config,
)
from sparsebox.grid import grid_for
from sparsebox.snapshot import (
    SnapshotChecksumError,
    SnapshotMagicError,
    SnapshotTruncatedError,
    SnapshotVersionError,
    load_snapshot,
    save_snapshot,
)
from sparsebox.solver import init_field


class TestConfigParsing:
    def test_minimal_config_fills_defaults(self):
        cfg = parse_config("n = 32\nic = abc\nt_end = 0.1\n")
        assert cfg.n == 32
        assert cfg.ic == "abc"
        assert cfg.t_end == 0.1
        assert cfg.dt == 1e-3  # default echoed
        assert cfg.delta == 0.75

    def test_comments_and_blanks(self):
        cfg = parse_config("# a comment\n\nn = 16  # trailing\n")
        assert cfg.n == 16

    def test_lambda_out_of_range_names_precondition(self):
        with pytest.raises(ConfigError, match=r"lambda must lie in \(0, 1\)"):
            parse_config("lambda = 1.2\ntuning = manual\n")

    def test_unknown_key_is_error(self):
        with pytest.raises(ConfigError, match="unknown key 'viscosity'"):
            parse_config("viscosity = 2\n")

    def test_type_mismatch(self):
        with pytest.raises(ConfigError, match="expected an integer"):
            parse_config("n = 32.5\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("n = 32\nn = 64\n")

    def test_bad_bool(self):
        with pytest.raises(ConfigError, match="'true' or 'false'"):
            parse_config("adaptive = yes\n")

    def test_tuning_auto_derives_lambda(self):
        cfg = parse_config("delta = 0.75\n")
        assert cfg.lam == pytest.approx(0.4503474256843126, abs=1e-12)
        assert round(cfg.lam, 5) == 0.45035

    def test_tuning_manual_keeps_lambda(self):
        cfg = parse_config("tuning = manual\nlambda = 0.42\n")
        assert cfg.lam == 0.42

    def test_k_list_parsing(self):
        cfg = parse_config("k_list = 0, 2, 5\n")
        assert cfg.k_list == (0, 2, 5)
        with pytest.raises(ConfigError, match="k_list"):
            parse_config("k_list = 0,99\n")

    def test_power_of_two_enforced(self):
        with pytest.raises(ConfigError, match="power of two"):
            parse_config("n = 48\n")


class TestConfigRoundTrip:
    def test_default_round_trip(self):
        cfg = RunConfig()
        assert parse_config(serialize_config(cfg)) == cfg

    def test_awkward_floats_round_trip(self):
        cfg = parse_config(
            "dt = 0.0007071067811865476\nbox_length = 6.1\nsample_interval = 1e-4\n"
            "diag_interval = 0.3333333333333333\n"
        )
        again = parse_config(serialize_config(cfg))
        assert again == cfg
        assert serialize_config(again) == serialize_config(cfg)

    def test_hash_stable_and_sensitive(self):
        a = parse_config("n = 32\n")
        b = parse_config("n = 32\n")
        c = parse_config("n = 64\n")
        assert config_hash(a) == config_hash(b)
        assert config_hash(a) != config_hash(c)


class TestSnapshotRoundTrip:
    def test_bit_identical(self, tmp_path):
        g = grid_for(32)
        f = init_field("random_bandlimited", g, seed=123, kappa_cut=6)
        path = tmp_path / "field.bin"
        save_snapshot(f, path, role="velo", t=0.625)
        g2, meta = load_snapshot(path)
        assert np.array_equal(g2.data, f.data)
        assert meta.n == 32
        assert meta.role == "velo"
        assert meta.t == 0.625
        assert meta.box_length == g.length

    def test_corrupted_payload_byte(self, tmp_path):
        g = grid_for(16)
        f = init_field("abc", g)
        path = tmp_path / "field.bin"
        save_snapshot(f, path)
        blob = bytearray(path.read_bytes())
        blob[100] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(SnapshotChecksumError, match="checksum"):
            load_snapshot(path)

    def test_version_bump_rejected(self, tmp_path):
        g = grid_for(16)
        f = init_field("abc", g)
        path = tmp_path / "field.bin"
        save_snapshot(f, path)
        blob = bytearray(path.read_bytes())
        blob[4] = 2  # little-endian version word
        path.write_bytes(bytes(blob))
        with pytest.raises(SnapshotVersionError, match="incompatible"):
            load_snapshot(path)

    def test_truncated_file(self, tmp_path):
        g = grid_for(16)
        f = init_field("abc", g)
        path = tmp_path / "field.bin"
        save_snapshot(f, path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(SnapshotTruncatedError):
            load_snapshot(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOPE" + b"\0" * 64)
        with pytest.raises(SnapshotMagicError):
            load_snapshot(path)
