import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import near_field_scene, random_scene
from ristoolkit.core import (DirectionTerminal, Frequency, PointTerminal, Scene, make_layout,
                             wavenumber, wrap_phase)
from ristoolkit.fields import scattered_field
from ristoolkit.synthesis import (EXHAUSTIVE_MAX_COLUMNS, ColumnContribution, PatternMask,
                                  collapse_columns, column_contributions, contribution_quantized,
                                  optimize_exhaustive, optimize_greedy, phase_profile,
                                  quantize_1bit, quantized_mask, synthesize)
from ristoolkit.unitcell import State

F0 = 27.5e9


def brute_force(contrib):
    """Every mask in lexicographic order (OFF < ON, column 0 first); returns (best, all_values)."""
    vals = {}
    for bits in itertools.product((False, True), repeat=contrib.n_cols):
        vals[bits] = abs(sum(on if b else off for b, on, off in zip(bits, contrib.c_on, contrib.c_off)))
    best = max(vals.values())
    return next(b for b, v in vals.items() if v == best), vals


def random_contrib(rng, n):
    return ColumnContribution(rng.normal(size=n) + 1j * rng.normal(size=n),
                              rng.normal(size=n) + 1j * rng.normal(size=n))


# --- pattern mask ---------------------------------------------------------------

def test_mask_serialization():
    m = PatternMask.from_bitstring("0110")
    assert m.columns == (False, True, True, False)
    assert m.to_bitstring() == "0110"
    assert PatternMask.from_json(m.to_json()) == m
    assert m.to_json() == '{"columns": [0, 1, 1, 0]}'
    assert m.n_on == 2 and len(m) == 4
    assert PatternMask.all_on(3).to_bitstring() == "111"


@pytest.mark.parametrize("bad", ["", "01a", '{"columns": [0, 2]}', '{"cols": [1]}', "[1, 0]"])
def test_mask_rejects_garbage(bad):
    with pytest.raises(ValueError):
        if bad.startswith(("{", "[")):
            PatternMask.from_json(bad)
        else:
            PatternMask.from_bitstring(bad)


def test_mask_cell_shape_checked():
    with pytest.raises(ValueError):
        PatternMask((True, False), cells=np.ones((3, 3), bool))


# --- phase profile ----------------------------------------------------------------

def test_plane_wave_limit_is_flat():
    lay = make_layout(20, 20, 2.35e-3)
    prof = phase_profile(lay, (0.0, 0.0, 1e6), (0.0, 0.0, 1.0), F0)
    dev = wrap_phase(prof - prof[0, 0])
    assert np.max(np.abs(dev)) < 1e-3


def test_two_element_phase_step():
    lay = make_layout(1, 2, 2.35e-3)
    th = np.deg2rad(30)
    feed = np.array([0.2 * np.sin(th), 0.0, 0.2 * np.cos(th)])
    prof = phase_profile(lay, feed, (0.0, 0.0, 1.0), F0)
    k = 2 * np.pi * F0 / 299_792_458.0
    x = np.array([-1.175e-3, 1.175e-3])
    exact = k * (np.hypot(feed[0] - x[0], feed[2]) - np.hypot(feed[0] - x[1], feed[2]))
    assert abs(wrap_phase(prof[0, 0] - prof[0, 1])) == pytest.approx(exact, abs=1e-9)
    assert exact == pytest.approx(0.677, rel=0.01)
    assert k * 0.5 * 2.35e-3 == pytest.approx(exact, rel=0.01)


@given(st.floats(0.25, 4.0))
@settings(max_examples=25, deadline=None)
def test_profile_scale_invariance(s):
    a = phase_profile(make_layout(4, 5, 2.35e-3), (0.05, 0.02, 0.2), (0.3, 0.0, np.sqrt(0.91)), F0)
    b = phase_profile(make_layout(4, 5, 2.35e-3 * s), (0.05 * s, 0.02 * s, 0.2 * s),
                      (0.3, 0.0, np.sqrt(0.91)), F0 / s)
    assert np.max(np.abs(wrap_phase(a - b))) < 1e-8


@pytest.mark.parametrize("theta_deg", [-50, -20, 10, 35, 60])
def test_specular_profile_has_no_gradient(theta_deg):
    th = np.deg2rad(theta_deg)
    lay = make_layout(6, 9, 2.35e-3)
    feed = DirectionTerminal.at_angle(th)
    spec = DirectionTerminal.at_angle(-th)
    prof = phase_profile(lay, feed, spec, F0)
    assert np.max(np.abs(wrap_phase(prof - prof[0, 0]))) < 1e-9


def test_profile_rejects_feed_on_element():
    with pytest.raises(ValueError):
        phase_profile(make_layout(1, 1, 1e-3), (0.0, 0.0, 0.0), (0, 0, 1.0), F0)


# --- quantization and collapse ------------------------------------------------------

def test_quantize_exact_state_phases(resp):
    on = np.full((2, 2), resp.phase(State.ON, F0))
    off = np.full((2, 2), resp.phase(State.OFF, F0))
    assert quantize_1bit(on, resp, F0).all()
    assert not quantize_1bit(off, resp, F0).any()


def test_quantize_matches_cellwise_oracle(resp):
    rng = np.random.default_rng(5)
    for _ in range(20):
        f = rng.uniform(22.5e9, 30e9)
        prof = rng.uniform(-np.pi, np.pi, (5, 5))
        expect = np.empty((5, 5), bool)
        for i in range(5):
            for j in range(5):
                d_on = abs(np.angle(np.exp(1j * (prof[i, j] - np.angle(resp.reflection(State.ON, f))))))
                d_off = abs(np.angle(np.exp(1j * (prof[i, j] - np.angle(resp.reflection(State.OFF, f))))))
                expect[i, j] = d_on < d_off
        assert np.array_equal(quantize_1bit(prof, resp, f), expect)


@given(st.floats(-np.pi, np.pi), st.floats(22.5e9, 30e9))
@settings(max_examples=200, deadline=None)
def test_quantize_picks_closer_state(resp, phi, f):
    chosen = quantize_1bit(np.array([[phi]]), resp, f)[0, 0]
    err = {s: abs(wrap_phase(phi - resp.phase(s, f))) for s in State}
    me, other = (State.ON, State.OFF) if chosen else (State.OFF, State.ON)
    assert err[me] <= err[other]


def test_collapse_majority():
    assert collapse_columns(np.ones((4, 3), bool)) == PatternMask.all_on(3)
    col = np.zeros((20, 2), bool)
    col[:12, 0] = True
    col[:10, 1] = True
    m = collapse_columns(col)
    assert m.columns == (True, False)
    assert m.cells.shape == (20, 2)


# --- contributions ----------------------------------------------------------------------

def test_single_element_contributions(resp):
    lay = make_layout(1, 1, 2.35e-3)
    sc = near_field_scene(F0)
    c = column_contributions(lay, sc, resp)
    assert c.c_on[0] == pytest.approx(scattered_field(lay, (True,), resp, sc).value, rel=1e-12)
    assert c.c_off[0] == pytest.approx(scattered_field(lay, (False,), resp, sc).value, rel=1e-12)


def test_contributions_sum_to_field(resp):
    lay = make_layout(4, 2, 2.35e-3)
    rng = np.random.default_rng(3)
    for _ in range(10):
        sc = random_scene(rng)
        c = column_contributions(lay, sc, resp)
        for bits in itertools.product((False, True), repeat=2):
            e = scattered_field(lay, bits, resp, sc).value
            assert abs(c.total(bits) - e) <= 1e-12 * abs(e)


def test_mirror_columns_equal_in_symmetric_scene(resp):
    lay = make_layout(6, 8, 2.35e-3)
    feed = PointTerminal((0.0, 0.1, 0.17))
    obs = DirectionTerminal((0.0, -0.3, np.sqrt(0.91)))
    c = column_contributions(lay, Scene(feed, obs, Frequency(F0)), resp)
    assert np.allclose(c.c_on, c.c_on[::-1], rtol=1e-12, atol=0)
    assert np.allclose(c.c_off, c.c_off[::-1], rtol=1e-12, atol=0)


def test_contribution_validation():
    with pytest.raises(ValueError):
        ColumnContribution([1, 2], [1])
    with pytest.raises(ValueError):
        ColumnContribution([np.nan], [1])


# --- exhaustive ---------------------------------------------------------------------------

def test_exhaustive_all_real_positive():
    c = ColumnContribution([3.0, 2.0, 5.0], [1.0, 1.5, 0.1])
    assert optimize_exhaustive(c) == PatternMask.all_on(3)


def test_exhaustive_two_column_tie():
    # |sum| = 2 for both 00 and 11; the documented tie order returns 00
    c = ColumnContribution([1.0, 1.0], [-1.0, -1.0])
    best, vals = brute_force(c)
    m = optimize_exhaustive(c)
    assert abs(c.total(m)) == pytest.approx(2.0)
    assert vals[(True, True)] == pytest.approx(2.0)
    assert m.columns == best == (False, False)


def test_exhaustive_matches_brute_force():
    for seed in range(100):
        c = random_contrib(np.random.default_rng(seed), 10)
        best, _ = brute_force(c)
        assert optimize_exhaustive(c).columns == best


def test_exhaustive_small_widths():
    for n in (1, 2, 3, 5):
        c = random_contrib(np.random.default_rng(n), n)
        assert optimize_exhaustive(c).columns == brute_force(c)[0]


def test_exhaustive_chunking_invariant(monkeypatch):
    import ristoolkit.synthesis as syn
    c = random_contrib(np.random.default_rng(11), 14)
    ref = optimize_exhaustive(c)
    monkeypatch.setattr(syn, "_CHUNK", 37)
    assert optimize_exhaustive(c) == ref


def test_exhaustive_cap():
    c = random_contrib(np.random.default_rng(0), EXHAUSTIVE_MAX_COLUMNS + 1)
    with pytest.raises(ValueError, match="greedy"):
        optimize_exhaustive(c)


@given(st.floats(-np.pi, np.pi), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_global_phase_invariance(phase, seed):
    c = random_contrib(np.random.default_rng(seed), 8)
    _, vals = brute_force(c)
    _, vals_rot = brute_force(c.rotated(phase))
    top = max(vals.values())
    argmax = {b for b, v in vals.items() if v >= top * (1 - 1e-12)}
    top_r = max(vals_rot.values())
    argmax_r = {b for b, v in vals_rot.items() if v >= top_r * (1 - 1e-12)}
    assert argmax == argmax_r
    assert optimize_exhaustive(c.rotated(phase)).columns in argmax


# --- greedy ---------------------------------------------------------------------------------

def test_greedy_is_one_flip_local_optimum():
    for seed in range(50):
        c = random_contrib(np.random.default_rng(seed), 10)
        g = np.array(optimize_greedy(c).columns)
        val = abs(c.total(g))
        for j in range(10):
            h = g.copy()
            h[j] = not h[j]
            assert abs(c.total(h)) <= val


def test_greedy_keeps_optimal_start():
    c = random_contrib(np.random.default_rng(2), 10)
    e = optimize_exhaustive(c)
    assert optimize_greedy(c, e) == e


def test_greedy_start_length_checked():
    with pytest.raises(ValueError):
        optimize_greedy(random_contrib(np.random.default_rng(0), 4), (True,))


def test_contribution_quantized_matches_single_row_pipeline(resp):
    lay = make_layout(1, 12, 2.35e-3)
    rng = np.random.default_rng(8)
    for _ in range(30):
        sc = random_scene(rng)
        c = column_contributions(lay, sc, resp)
        assert contribution_quantized(c) == quantized_mask(lay, sc, resp)


def test_dominance_chain(resp, layout10):
    rng = np.random.default_rng(21)
    for _ in range(100):
        sc = random_scene(rng)
        c = column_contributions(layout10, sc, resp)
        q = quantized_mask(layout10, sc, resp)
        g = optimize_greedy(c, q)
        e = optimize_exhaustive(c)
        assert abs(c.total(e)) >= abs(c.total(g)) * (1 - 1e-12)
        assert abs(c.total(g)) >= abs(c.total(q)) * (1 - 1e-12)


def test_exhaustive_dominates_quantized_on_20_columns(resp, layout20):
    rng = np.random.default_rng(4)
    for _ in range(100):
        sc = random_scene(rng)
        c = column_contributions(layout20, sc, resp)
        e = optimize_exhaustive(c)
        q = quantized_mask(layout20, sc, resp)
        assert abs(c.total(e)) >= abs(c.total(q)) * (1 - 1e-12)


# --- pipeline ---------------------------------------------------------------------------------

def test_synthesize_dispatch(resp, layout10):
    sc = near_field_scene(F0)
    q = synthesize(layout10, sc, resp, "quantized")
    assert q.cells is not None
    c = column_contributions(layout10, sc, resp)
    assert synthesize(layout10, sc, resp, "exhaustive") == optimize_exhaustive(c)
    assert synthesize(layout10, sc, resp, "greedy") == optimize_greedy(c, q)
    with pytest.raises(ValueError):
        synthesize(layout10, sc, resp, "annealing")


def test_synthesize_deterministic(resp, layout20):
    sc = near_field_scene(F0)
    assert synthesize(layout20, sc, resp) == synthesize(layout20, sc, resp)
