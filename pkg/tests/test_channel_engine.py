import math

import numpy as np
import pytest

from colosim.channel import (
    HISTORY,
    ChannelError,
    CirTaps,
    Engine,
    EngineConfig,
    NodeTuning,
    SampleBlock,
    create_engine,
    max_emulable_delay,
)
from colosim.channel.iq import iq_path, append_iq, read_iq
from util import convolution_oracle, random_taps, run_engine


def impulse(n, length, at=0, node=0):
    x = np.zeros((n, length), dtype=np.complex128)
    x[node, at] = 1.0
    return x


def engine(n=2, fs=1e6, b=256, noise=-math.inf, seed=7):
    return create_engine(EngineConfig(n, fs, b, noise, seed))


def test_create_engine_defaults():
    e = engine()
    assert e.clock == 0
    assert e.taps(0, 1).taps == ()


def test_single_node_rejected():
    with pytest.raises(ChannelError, match="n_nodes ≥ 2"):
        engine(n=1)


def test_channel_cap():
    e = engine(n=256, b=4)
    assert e.n_nodes * (e.n_nodes - 1) == 65_280
    with pytest.raises(ChannelError, match="n_nodes"):
        engine(n=257, b=4)


@pytest.mark.parametrize("kw", [dict(fs=0), dict(b=0), dict(noise=math.nan), dict(seed=-1)])
def test_bad_config_names_field(kw):
    with pytest.raises(ChannelError):
        engine(**kw)


def test_cirtaps_invariants():
    g = 0.5
    with pytest.raises(ChannelError, match="more than 4 non-zero taps"):
        CirTaps(0, 1, ((0, g), (5, g), (9, g), (12, g), (20, g)))
    with pytest.raises(ChannelError, match="tx == rx"):
        CirTaps(1, 1, ((0, g),))
    with pytest.raises(ChannelError, match="512"):
        CirTaps(0, 1, ((512, g),))
    with pytest.raises(ChannelError, match="increasing"):
        CirTaps(0, 1, ((5, g), (5, g)))
    with pytest.raises(ChannelError, match="finite"):
        CirTaps(0, 1, ((0, complex(math.inf, 0)),))


def test_identity_impulse():
    e = engine()
    e.set_taps([CirTaps(0, 1, ((0, 1 + 0j),))])
    y = e.process(impulse(2, 256))
    expected = np.zeros(256, dtype=complex)
    expected[0] = 1
    assert np.array_equal(y[1], expected)
    assert np.all(y[0] == 0)


def test_pure_delay_across_blocks():
    e = engine(b=64)
    e.set_taps([CirTaps(0, 1, ((100, 0.5),))])
    y = run_engine(e, impulse(2, 256))
    assert y[1, 100] == 0.5
    assert np.count_nonzero(y[1]) == 1


def test_taps_take_effect_at_next_boundary():
    e = engine(b=16)
    x = np.ones((2, 16), dtype=complex)
    e.process(x)
    e.set_taps([CirTaps(0, 1, ((0, 2.0),))])
    # staged, not yet applied
    assert e.taps(0, 1).taps == ()
    y = e.process(x)
    assert np.all(y[1] == 2.0)


def test_update_list_is_atomic_and_unlisted_links_kept():
    e = engine(n=3, b=8)
    e.set_taps([CirTaps(0, 1, ((0, 1.0),)), CirTaps(0, 2, ((0, 1.0),))])
    e.process(np.zeros((3, 8)))
    e.set_taps([CirTaps(0, 1, ((3, 0.25),))])
    e.process(np.zeros((3, 8)))
    assert e.taps(0, 1).taps == ((3, 0.25 + 0j),)
    assert e.taps(0, 2).taps == ((0, 1 + 0j),)


def test_set_taps_rejects_unknown_node():
    with pytest.raises(ChannelError):
        engine(n=2).set_taps([CirTaps(0, 5, ((0, 1.0),))])


def test_matches_convolution_oracle():
    gen = np.random.default_rng(11)
    for trial in range(5):
        n = int(gen.integers(2, 6))
        b = int(gen.choice([1, 7, 64, 1000]))
        links = random_taps(gen, n, density=0.7)
        e = engine(n=n, b=b)
        e.set_taps(links)
        length = b * int(np.ceil(3000 / b))
        x = gen.normal(size=(n, length)) + 1j * gen.normal(size=(n, length))
        y = run_engine(e, x)
        ref = convolution_oracle(x, links, n)
        assert np.max(np.abs(y - ref)) <= 1e-9 * np.max(np.abs(ref))


def test_superposition_is_exact():
    gen = np.random.default_rng(3)
    n, b, length = 4, 500, 5000
    links = random_taps(gen, n)
    x = gen.normal(size=(n, length)) + 1j * gen.normal(size=(n, length))

    def run(xx):
        e = engine(n=n, b=b)
        e.set_taps(links)
        return run_engine(e, xx)

    total = run(x)
    solo_sum = np.zeros_like(total)
    for i in range(n):
        xi = np.zeros_like(x)
        xi[i] = x[i]
        solo_sum += run(xi)
    # summing solo runs in transmitter order reproduces the engine's order exactly
    assert np.array_equal(total, solo_sum)


def test_linearity():
    gen = np.random.default_rng(5)
    n, b = 3, 128
    links = random_taps(gen, n)
    x1 = gen.normal(size=(n, 1024)) + 0j
    x2 = gen.normal(size=(n, 1024)) * 1j
    a, c = 0.3 - 2j, 1.7

    def run(xx):
        e = engine(n=n, b=b)
        e.set_taps(links)
        return run_engine(e, xx)

    lhs = run(a * x1 + c * x2)
    rhs = a * run(x1) + c * run(x2)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * np.max(np.abs(lhs))


def test_block_size_invariance_bit_identical_with_noise():
    gen = np.random.default_rng(9)
    n = 3
    links = random_taps(gen, n)
    x = gen.normal(size=(n, 4096)) + 1j * gen.normal(size=(n, 4096))
    outs = []
    for b in (256, 512):
        e = engine(n=n, b=b, noise=-20.0, seed=42)
        e.set_taps(links)
        outs.append(run_engine(e, x))
    assert np.array_equal(outs[0], outs[1])


def test_determinism_and_seed_dependence():
    x = np.zeros((2, 512), dtype=complex)

    def run(seed):
        e = engine(noise=-10.0, seed=seed)
        return run_engine(e, x)

    assert np.array_equal(run(1), run(1))
    assert not np.array_equal(run(1), run(2))


def test_noise_power():
    e = engine(n=2, b=4096, noise=-20.0)
    y = run_engine(e, np.zeros((2, 4096 * 25), dtype=complex))
    p = np.mean(np.abs(y) ** 2, axis=1)
    assert np.allclose(p, 0.01, rtol=0.05)
    # receivers get independent noise
    assert abs(np.vdot(y[0], y[1])) / y.shape[1] < 0.001


def test_per_receiver_noise_power():
    e = create_engine(EngineConfig(3, 1e6, 1024, [-math.inf, -10.0, -30.0]))
    y = run_engine(e, np.zeros((3, 1024 * 50), dtype=complex))
    p = np.mean(np.abs(y) ** 2, axis=1)
    assert p[0] == 0
    assert p[1] == pytest.approx(0.1, rel=0.05)
    assert p[2] == pytest.approx(0.001, rel=0.05)


def test_energy_through_taps():
    gen = np.random.default_rng(2)
    taps = ((0, 0.5), (17, 0.3j), (200, -0.2), (511, 0.1 + 0.1j))
    e = engine(b=1000)
    e.set_taps([CirTaps(0, 1, taps)])
    length = 100_000
    x = (gen.normal(size=(2, length)) + 1j * gen.normal(size=(2, length))) / math.sqrt(2)
    y = run_engine(e, x)
    expected = sum(abs(g) ** 2 for _, g in taps)
    assert np.mean(np.abs(y[1, 600:]) ** 2) == pytest.approx(expected, rel=0.05)


def test_tap_visits_are_sparse():
    n, b = 5, 100
    e = engine(n=n, b=b)
    gen = np.random.default_rng(1)
    links = random_taps(gen, n)
    e.set_taps(links)
    e.process(np.ones((n, b)))
    assert e.tap_visits == b * sum(len(link.taps) for link in links)
    assert e.tap_visits <= b * n * (n - 1) * 4


def test_tuning_mismatch_silences_links():
    e = engine(fs=1e6, b=8)
    e.set_taps([CirTaps(0, 1, ((0, 1.0),))], carrier_hz=1e9)
    e.set_tuning([NodeTuning(0, 1e9), NodeTuning(1, 1e9)])
    x = np.ones((2, 8))
    assert np.all(e.process(x)[1] == 1)
    assert e.link_active(0, 1)
    e.set_carrier(1.1e9)
    assert np.all(e.process(x)[1] == 0)
    assert not e.link_active(0, 1)
    e.set_tuning([NodeTuning(0, 1.1e9), NodeTuning(1, 1.1e9)])
    assert np.all(e.process(x)[1] == 1)


def test_tuning_within_half_bandwidth_is_active():
    e = engine(fs=1e6, b=4)
    e.set_taps([CirTaps(0, 1, ((0, 1.0),))], carrier_hz=1e9)
    e.set_tuning([NodeTuning(0, 1e9 + 0.5e6), NodeTuning(1, 1e9 - 0.49e6)])
    assert np.all(e.process(np.ones((2, 4)))[1] == 1)


def test_tuning_validation():
    e = engine()
    with pytest.raises(ChannelError):
        e.set_tuning([NodeTuning(7, 1e9)])
    with pytest.raises(ChannelError):
        NodeTuning(0, 0.0)


def test_reset_keeps_taps_and_replays_noise():
    e = engine(noise=-30.0)
    e.set_taps([CirTaps(0, 1, ((3, 0.5),))])
    x = impulse(2, 256)
    first = e.process(x)
    e.process(x)
    e.reset()
    assert e.clock == 0
    assert np.array_equal(e.process(x), first)


def test_process_block_checks():
    e = engine(b=4)
    good = [SampleBlock(j, 0, np.zeros(4)) for j in range(2)]
    out = e.process_block(good)
    assert [blk.t0 for blk in out] == [0, 0] and e.clock == 4
    with pytest.raises(ChannelError, match="t0"):
        e.process_block(good)
    with pytest.raises(ChannelError):
        e.process_block([SampleBlock(0, 4, np.zeros(4))])
    with pytest.raises(ChannelError, match="length"):
        e.process_block([SampleBlock(j, 4, np.zeros(3)) for j in range(2)])


def test_nonfinite_input_rejected():
    x = np.zeros((2, 256), dtype=complex)
    x[0, 3] = np.nan
    with pytest.raises(ChannelError, match="finite"):
        engine().process(x)


def test_fast_forward_equals_processing_zeros():
    gen = np.random.default_rng(4)
    links = random_taps(gen, 3)
    x = gen.normal(size=(3, 256)) + 0j
    z = np.zeros((3, 256))
    a = engine(n=3, noise=-40.0)
    b = engine(n=3, noise=-40.0)
    for e in (a, b):
        e.set_taps(links)
        e.process(x)
    a.process(z)
    a.process(z)
    b.fast_forward(2)
    assert a.clock == b.clock
    assert np.array_equal(a.process(x), b.process(x))


@pytest.mark.parametrize("fs,seconds,meters", [
    (80e6, 6.3875e-6, 1915.0), (1e6, 511e-6, 153_200.0), (100e6, 5.11e-6, 1532.0)])
def test_max_emulable_delay(fs, seconds, meters):
    s, m = max_emulable_delay(fs)
    assert s == pytest.approx(seconds, rel=1e-12)
    assert m == pytest.approx(meters, rel=1e-3)
    assert max_emulable_delay(EngineConfig(2, fs)) == (s, m)


def test_history_length():
    assert HISTORY == 511
    e = engine(b=1)
    e.set_taps([CirTaps(0, 1, ((511, 1.0),))])
    y = run_engine(e, impulse(2, 600))
    assert y[1, 511] == 1 and np.count_nonzero(y[1]) == 1


def test_iq_dump_roundtrip(tmp_path):
    x = np.array([1 + 2j, -0.5j, 3.25])
    p = iq_path(tmp_path, 3)
    append_iq(p, x[:2])
    append_iq(p, x[2:])
    assert p.name == "node3.iq"
    assert p.stat().st_size == 3 * 16
    assert np.array_equal(read_iq(p), x)
    raw = np.fromfile(p, dtype="<f8")
    assert np.array_equal(raw, [1, 2, 0, -0.5, 3.25, 0])


def test_engine_class_is_factory_product():
    assert isinstance(create_engine(EngineConfig(2, 1e6)), Engine)
