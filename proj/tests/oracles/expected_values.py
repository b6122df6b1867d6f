#!/usr/bin/env python3
"""Independent derivation of the frozen expected values used in the C++ tests.

Every closed-form quantity asserted with a hard-coded constant in tests/ is
computed here from first principles with mpmath (50 significant digits), so
the C++ implementation is cross-checked against an entirely separate
evaluation path.  Run:  python3 tests/oracles/expected_values.py
"""

import mpmath as mp

mp.mp.dps = 50

HBAR = mp.mpf("1.054571817e-34")   # J s (CODATA 2018)
KB = mp.mpf("1.380649e-23")        # J/K (exact, SI 2019)
PI = mp.pi

# reference membrane: 76 ng, 264 kHz, 24.5 mHz linewidth, 500 mK bath
MASS = mp.mpf("76e-12") * mp.mpf("1e-3") * mp.mpf("1e3")  # 76 ng in kg
MASS = mp.mpf("7.6e-11")
OMEGA_M = 2 * PI * mp.mpf("264e3")
GAMMA_M = 2 * PI * mp.mpf("24.5e-3")
T_BATH = mp.mpf("0.5")
S_XN = mp.mpf("7.4e-33")
Q_M = OMEGA_M / GAMMA_M


def show(name, value):
    print(f"{name:40s} = {mp.nstr(value, 12)}")


# --- zero-point motion and occupations -------------------------------------
x_zp = mp.sqrt(HBAR / (2 * MASS * OMEGA_M))
show("x_zp [m]", x_zp)
show("x_zp^2 [m^2]", x_zp**2)

n_203uK = KB * mp.mpf("203e-6") / (HBAR * OMEGA_M)
show("n(203 uK)", n_203uK)
n_500mK = KB * T_BATH / (HBAR * OMEGA_M)
show("n(500 mK)", n_500mK)

# --- cooldown trace value ----------------------------------------------------
g = mp.mpf(100)
t = 1 / (GAMMA_M * (1 + g))
T_cd = T_BATH / (1 + g) * (1 + g * mp.exp(-GAMMA_M * (1 + g) * t))
show("cooldown T(g=100, t=1/(Gm*101)) [K]", T_cd)

# --- final feedback temperature ---------------------------------------------
def t_final(gv, s_xn=S_XN, t_bath=T_BATH):
    noise_coeff = MASS * OMEGA_M**3 / (4 * KB * Q_M)
    return t_bath / (1 + gv) + noise_coeff * gv**2 / (1 + gv) * s_xn

show("T_final(gv=1e4) [K]", t_final(mp.mpf("1e4")))
show("  bath term", T_BATH / (1 + mp.mpf("1e4")))
show("  noise term", t_final(mp.mpf("1e4")) - T_BATH / (1 + mp.mpf("1e4")))

# --- optimal gain -------------------------------------------------------------
ratio = T_BATH * 4 * KB * Q_M / (MASS * OMEGA_M**3 * S_XN)
g_opt = mp.sqrt(1 + ratio) - 1
show("g_opt", g_opt)
show("T(g_opt) [K]", t_final(g_opt))
# verify stationarity by high-precision central difference
h = g_opt * mp.mpf("1e-12")
deriv = (t_final(g_opt + h) - t_final(g_opt - h)) / (2 * h)
scale = t_final(g_opt) / g_opt
show("dT/dg at g_opt (rel to T/g)", deriv / scale)

# --- coupling rate -----------------------------------------------------------
R_M = mp.mpf("0.42")
FINESSE = mp.mpf(160)
N_ATOMS = mp.mpf("1e8")
M_RB87 = mp.mpf("1.44316060e-25")  # kg
omega_a = OMEGA_M
g_N = R_M**2 * omega_a * mp.sqrt(N_ATOMS * M_RB87 * omega_a / (MASS * OMEGA_M)) \
    * 2 * FINESSE / PI
show("g_N [rad/s]", g_N)

# --- cooperativity for the quoted max sympathetic rate ------------------------
gamma_sym = mp.mpf("23.3")
show("C_hybrid (23.3 / Gamma_m)", gamma_sym / GAMMA_M)
show("Gamma_m [1/s]", GAMMA_M)

# --- minimum sympathetic temperatures -----------------------------------------
show("T_min(g_s=170) [K]", T_BATH / (1 + mp.mpf(170)))
show("T_min(Gsym=3.7) [K]", T_BATH / (1 + mp.mpf("3.7") / GAMMA_M))

# --- thermal force PSD ---------------------------------------------------------
s_fth = 4 * KB * T_BATH * MASS * GAMMA_M
show("S_Fth [N^2/Hz]", s_fth)

# --- ground-state criterion ----------------------------------------------------
bound = 4 * x_zp**2 / (n_500mK * GAMMA_M)
show("ground-state bound [m^2/Hz]", bound)
show("margin", bound / S_XN)

# --- full-band closure of the thermal displacement spectrum --------------------
# integral over f of |chi|^2 * S_Fth must equal kB T / (m w^2)
def chi2(omega, gamma):
    return 1 / (MASS**2 * ((OMEGA_M**2 - omega**2) ** 2 + omega**2 * gamma**2))

var_quad = mp.quad(lambda f: chi2(2 * PI * f, GAMMA_M) * s_fth,
                   [0, OMEGA_M / (2 * PI) * mp.mpf("0.999"),
                    OMEGA_M / (2 * PI), OMEGA_M / (2 * PI) * mp.mpf("1.001"),
                    mp.inf])
show("quad variance [m^2]", var_quad)
show("kB T/(m w^2) [m^2]", KB * T_BATH / (MASS * OMEGA_M**2))

# --- Welch peak bias sanity (Hann ENBW vs Lorentzian FWHM) ---------------------
# effective kernel ~ Hann power response; estimate of peak droop for
# FWHM = w, bin spacing d: convolve lorentzian with |W(f)|^2
def hann_kernel_bias(fwhm_over_df):
    n = 512
    # Hann window power spectrum sampled finely (continuous approx)
    win = lambda f: (mp.sin(PI * f) / (PI * f * (1 - f**2))) ** 2 if f not in (0,) else 1
    # numeric: convolution at peak of unit lorentzian
    lor = lambda f: 1 / (1 + (2 * f / fwhm_over_df) ** 2)
    num = mp.quad(lambda f: lor(f) * hann_w2(f), [-8, 0, 8])
    den = mp.quad(lambda f: hann_w2(f), [-8, 0, 8])
    return num / den

def hann_w2(f):
    # squared magnitude of Hann window transform, f in bins
    if abs(f) < mp.mpf("1e-12"):
        return mp.mpf(1)
    if abs(abs(f) - 1) < mp.mpf("1e-12"):
        return mp.mpf("0.25")
    s = mp.sin(PI * f) / (PI * f) / ((1 - f) * (1 + f))
    return s**2

for r in (5, 10, 20):
    print(f"hann peak droop, FWHM={r} bins       = "
          f"{mp.nstr(1 - hann_kernel_bias(mp.mpf(r)), 6)}")
