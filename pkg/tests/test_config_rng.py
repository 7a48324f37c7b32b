"""Config file round-trips and the pinned portable noise generator."""

import numpy as np
import pytest

from mncs import GridSpec, RunConfig, init_field, normal_samples, parse_config, serialize_config
from mncs.config import ConfigError
from mncs.rng import splitmix64


def splitmix64_reference(seed: int, count: int) -> list[int]:
    """Plain-integer SplitMix64, the portability oracle."""
    mask = (1 << 64) - 1
    out = []
    state = seed & mask
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & mask
        x = state
        x ^= x >> 30
        x = (x * 0xBF58476D1CE4E5B9) & mask
        x ^= x >> 27
        x = (x * 0x94D049BB133111EB) & mask
        x ^= x >> 31
        out.append(x)
    return out


class TestConfig:
    def test_roundtrip_defaults(self):
        cfg = RunConfig()
        assert parse_config(serialize_config(cfg)) == cfg

    def test_roundtrip_matrix_and_none_fields(self):
        cfg = RunConfig(
            kinetics="cubic",
            mu=0.25,
            gamma=None,
            coupling_matrix=((-0.75,),),
            ic_path="some/ic.mncs1",
            output_dir="out",
            emit_pgm=True,
            t_end=12.5,
        )
        assert parse_config(serialize_config(cfg)) == cfg

    def test_roundtrip_fhn_matrix(self):
        cfg = RunConfig(gamma=None, coupling_matrix=((0.0, 1.0), (-1.0, -2.0)))
        back = parse_config(serialize_config(cfg))
        assert back == cfg
        assert np.allclose(back.coupling(), [[0.0, 1.0], [-1.0, -2.0]])

    def test_comments_and_blanks(self):
        text = "# full experiment\n\nn = 16  # override\nlength = 8.0\n"
        cfg = parse_config(text)
        assert cfg.n == 16 and cfg.length == 8.0

    def test_unknown_key_is_error(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("nn = 16\n")

    def test_duplicate_key_is_error(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("n = 16\nn = 32\n")

    def test_bad_value_is_error(self):
        with pytest.raises(ConfigError):
            parse_config("dt = fast\n")
        with pytest.raises(ConfigError):
            parse_config("emit_csv = yes\n")

    def test_invariants_enforced(self):
        with pytest.raises(ConfigError):
            RunConfig(dt=0.0)
        with pytest.raises(ConfigError):
            RunConfig(record_stride=0)
        with pytest.raises(ConfigError):
            RunConfig(noise_sigma=-0.1)
        with pytest.raises(ConfigError):
            RunConfig(gamma=1.0, coupling_matrix=((1.0,),))
        with pytest.raises(ConfigError):
            RunConfig(gamma=None, coupling_matrix=None)

    def test_scalar_shorthand_expands(self):
        cfg = RunConfig(gamma=6.0)
        assert np.array_equal(cfg.coupling(), -6.0 * np.eye(2))

    def test_matrix_shape_checked_against_components(self):
        cfg = RunConfig(gamma=None, coupling_matrix=((1.0,),))
        with pytest.raises(ConfigError):
            cfg.coupling()


class TestSplitMix:
    def test_matches_integer_reference(self):
        for seed in (0, 1, 42, 2**63 + 17):
            ours = splitmix64(seed, 8)
            ref = splitmix64_reference(seed, 8)
            assert [int(x) for x in ours] == ref

    def test_stream_offset(self):
        full = splitmix64(9, 10)
        tail = splitmix64(9, 4, start=6)
        assert np.array_equal(full[6:], tail)


class TestInitField:
    GRID = GridSpec(16, 8.0, components=2)

    def test_zero_sigma_gives_zero_field(self):
        field = init_field(self.GRID, 42, 0.0)
        assert np.all(field.data == 0.0)

    def test_determinism(self):
        a = init_field(self.GRID, 42, 0.1)
        b = init_field(self.GRID, 42, 0.1)
        assert a.data.tobytes() == b.data.tobytes()

    def test_seed_changes_stream(self):
        a = init_field(self.GRID, 42, 0.1)
        b = init_field(self.GRID, 43, 0.1)
        assert not np.array_equal(a.data, b.data)

    def test_component_major_fill_order(self):
        flat = normal_samples(7, 2 * 16 * 16)
        field = init_field(self.GRID, 7, 1.0)
        assert field.data[0, 0, 0] == flat[0]
        assert field.data[0, 0, 1] == flat[1]
        assert field.data[1, 0, 0] == flat[16 * 16]

    def test_sample_variance_in_band(self):
        grid = GridSpec(128, 64.0, components=2)
        field = init_field(grid, 42, 0.1)
        var = field.data.var()
        assert 0.0085 <= var <= 0.0115

    def test_uniform_extremes_stay_log_safe(self):
        # zero bits map to 2^-54 > 0; the all-ones pattern rounds to 1.0,
        # and both extremes keep the Box-Muller transform finite
        lo = ((np.uint64(0) >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        hi = ((np.uint64(2**64 - 1) >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        assert lo == 2.0**-54
        assert hi <= 1.0
        for u1 in (lo, hi):
            assert np.isfinite(np.sqrt(-2.0 * np.log(u1)))

    def test_box_muller_layout(self):
        bits = splitmix64(3, 4)
        u = ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        z0 = np.sqrt(-2.0 * np.log(u[0])) * np.cos(2 * np.pi * u[1])
        z1 = np.sqrt(-2.0 * np.log(u[0])) * np.sin(2 * np.pi * u[1])
        z = normal_samples(3, 4)
        assert z[0] == pytest.approx(z0, rel=1e-15)
        assert z[1] == pytest.approx(z1, rel=1e-15)
