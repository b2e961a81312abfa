import numpy as np
import pytest

from prfunify.analysis import (PsdEstimate, WindowSpec, azimuth_compress, claim1_oracle,
                               estimate_psd, extract_ipr, gating_psd_theory, window)
from prfunify.errors import ValidationError
from prfunify.filters import design_filter_bank
from prfunify.scenarios import SpaceborneSetup
from prfunify.simulate import point_target_response


@pytest.fixture(scope="module")
def setup():
    s = SpaceborneSetup()
    return s, s.grid()


def uniform_line(setup, x=0.0):
    s, g = setup
    return point_target_response(s.scene((x,)), g.output_positions())


# ---------------------------------------------------------------- windows

def test_hamming_closed_form():
    w = window("hamming", 5, alpha=0.6)
    np.testing.assert_allclose(w, [0.2, 0.6, 1.0, 0.6, 0.2], atol=1e-15)


def test_rect_and_errors():
    assert np.all(window("rect", 7) == 1.0)
    for a in (0.5, 1.2):
        with pytest.raises(ValidationError):
            window("hamming", 8, alpha=a)
    with pytest.raises(ValidationError):
        window("kaiser", 8)
    with pytest.raises(ValidationError):
        window("rect", 1)


def test_taylor_sidelobe_level():
    w = window(WindowSpec("taylor", nbar=6, sll_db=-35), 64)
    assert w.max() == pytest.approx(1.0)
    np.testing.assert_allclose(w, w[::-1], atol=1e-14)
    W = np.abs(np.fft.fft(w, 64 * 256))
    W = 20 * np.log10(np.maximum(W / W.max(), 1e-300))
    # first null then the first sidelobe peak
    k = 1
    while W[k + 1] < W[k]:
        k += 1
    first_side = W[k:k + 400].max()
    assert abs(first_side + 35) < 1.0


# ---------------------------------------------------------------- compression

def test_compress_center_peak_gain(setup):
    s, g = setup
    img = azimuth_compress(uniform_line(setup), g, None, pbw_crop=False)
    k = int(np.argmax(np.abs(img)))
    assert k == g.n_fft // 2
    assert abs(img[k]) == pytest.approx(g.n_d, rel=1e-9)


def test_compress_crop_length_and_center(setup):
    s, g = setup
    img = azimuth_compress(uniform_line(setup), g, "hamming", pbw_crop=True)
    assert img.size == g.n_save == round(2 / 3 * g.n_fft)
    assert int(np.argmax(np.abs(img))) == g.n_save // 2


def test_compress_shift(setup):
    s, g = setup
    img = azimuth_compress(uniform_line(setup, 17e3), g, None, pbw_crop=False)
    shift = int(np.argmax(np.abs(img))) - g.n_fft // 2
    assert abs(shift - 17e3 / g.pixel_pitch) <= 1.0


def test_compress_parseval(setup):
    s, g = setup
    y = uniform_line(setup)
    u = g.output_positions() - g.u_mid
    w = window("hamming", g.n_d)
    z = y * np.exp(1j * 4 * np.pi / g.lambda_c * np.sqrt(g.R ** 2 + u ** 2)) * w
    img = azimuth_compress(y, g, w, pbw_crop=False)
    assert np.sum(np.abs(img) ** 2) == pytest.approx(g.n_fft * np.sum(np.abs(z) ** 2), rel=1e-9)


def test_compress_rejects_wrong_length(setup):
    _, g = setup
    with pytest.raises(ValidationError):
        azimuth_compress(np.ones(10), g)


# ---------------------------------------------------------------- IPR

def dirichlet_line(n=64, over=16):
    return np.fft.fftshift(np.fft.fft(np.ones(n), n * over + 1))


def test_unwindowed_pslr():
    m = extract_ipr(dirichlet_line(), 1.0)
    assert m.pslr_db == pytest.approx(-13.26, abs=0.05)
    assert not m.fallback


def test_symmetric_line_center_and_width():
    line = dirichlet_line()
    m = extract_ipr(line, 0.5)
    c = line.size // 2
    assert m.peak_index == c and m.peak_pos_m == pytest.approx(0.0, abs=1e-12)
    # brute-force -3 dB crossing on a 64x finer grid
    fine = np.abs(np.fft.fftshift(np.fft.fft(np.ones(64), 64 * 16 * 64))) ** 2
    fine_db = 10 * np.log10(np.maximum(fine / fine.max(), 1e-300))
    k0 = fine.size // 2
    k = k0
    while fine_db[k] > -3:
        k += 1
    brute = 2 * (k - k0) / 64 * 0.5
    assert abs(m.width_3db_m - brute) <= 0.5


def test_ipr_invariant_to_phase_and_scale():
    line = dirichlet_line()
    a = extract_ipr(line, 1.0)
    b = extract_ipr(line * 7.3 * np.exp(1j * 0.9), 1.0)
    assert a.islr_db == pytest.approx(b.islr_db, abs=1e-10)
    assert a.pslr_db == pytest.approx(b.pslr_db, abs=1e-10)
    assert a.width_3db_m == pytest.approx(b.width_3db_m, rel=1e-10)


def test_fixed_span_method_and_fallback():
    line = dirichlet_line()
    m = extract_ipr(line, 1.0, method="fixed-span")
    assert m.method == "fixed-span" and m.mainlobe_span[0] < m.peak_index < m.mainlobe_span[1]
    # Monotone flanks: no nulls to find.
    mono = np.exp(-0.5 * ((np.arange(41) - 20) / 3.0) ** 2)
    f = extract_ipr(mono, 1.0)
    assert f.fallback
    with pytest.raises(ValidationError):
        extract_ipr(line, 1.0, method="other")


def test_reference_ipr_regression(setup):
    s, g = setup
    img = azimuth_compress(uniform_line(setup), g, s.window, pbw_crop=True)
    m = extract_ipr(img, g.pixel_pitch)
    # Ideal uniform sampling, Hamming(0.6), no pattern compensation.
    assert m.islr_db == pytest.approx(-25.29, abs=0.05)
    assert m.pslr_db == pytest.approx(-31.61, abs=0.05)
    assert m.pslr_db < 0 and m.width_3db_m > 0


# ---------------------------------------------------------------- PSD

def test_white_noise_psd_level():
    rng = np.random.default_rng(1)
    x = (rng.standard_normal(1_000_000) + 1j * rng.standard_normal(1_000_000)) / np.sqrt(2)
    est = estimate_psd(x, 128)
    assert est.omega[0] == pytest.approx(-np.pi) and est.omega[-1] < np.pi
    np.testing.assert_allclose(est.s, 1 / (2 * np.pi), rtol=0.10)


def test_tone_peak():
    n = np.arange(8192)
    w0 = 2 * np.pi * 37 / 256
    est = estimate_psd(np.exp(1j * w0 * n), 256)
    assert est.omega[np.argmax(est.s)] == pytest.approx(w0, abs=1e-12)


def test_gated_white_noise_matches_theory():
    rng = np.random.default_rng(2)
    x = (rng.standard_normal(1 << 20) + 1j * rng.standard_normal(1 << 20)) / np.sqrt(2)
    g = np.where(rng.random(x.size) < 0.5, x, 0)
    est = estimate_psd(g, 128)
    flat = PsdEstimate(est.omega, np.full(est.omega.size, 1 / (2 * np.pi)))
    theory = gating_psd_theory(0.5, flat)
    np.testing.assert_allclose(theory.s, 0.5 / (2 * np.pi), rtol=1e-12)
    np.testing.assert_allclose(est.s, theory.s, rtol=0.10)


def test_gating_theory_limits():
    om = np.linspace(-np.pi, np.pi, 64, endpoint=False)
    s = PsdEstimate(om, 1 + np.cos(om))
    assert gating_psd_theory(1.0, s).s is s.s
    assert np.all(gating_psd_theory(1e-9, s).s < 1e-8)
    flat = PsdEstimate(om, np.full(64, 3.0))
    np.testing.assert_allclose(gating_psd_theory(0.3, flat).s, 0.9, rtol=1e-14)
    with pytest.raises(ValidationError):
        gating_psd_theory(0.0, flat)


def test_psd_rejects_short_input():
    with pytest.raises(ValidationError):
        estimate_psd(np.ones(10), 16)


def test_claim1_oracle_trivia():
    _, f, bank = design_filter_bank(5, 8, 2 / 3)
    imp = np.zeros(200)
    imp[0] = 1
    out = claim1_oracle(imp, f, 8)
    np.testing.assert_array_equal(out[:6], bank.components[0])
    const = claim1_oracle(np.full(400, 2.0), f, 8)
    np.testing.assert_allclose(const[6:-6], 2.0 * f.taps.sum(), rtol=1e-13)
    with pytest.raises(ValidationError):
        claim1_oracle(np.ones(10), f, 8)
