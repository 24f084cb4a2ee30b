#!/usr/bin/env python3
"""Regenerates the frozen test fixtures under tests/fixtures/.

High-precision references are computed with mpmath at 60 significant digits
and written with 22 digits, enough to round-trip double precision with
headroom. Run from the repository root:

    python3 tests/gen_fixtures.py
"""
import os
import mpmath as mp

mp.mp.dps = 60

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "fixtures")
os.makedirs(OUT, exist_ok=True)


def erfcx(w):
    # The real part of erfc on the right half-plane cancels down to
    # ~exp(-Im(w)^2) of the working magnitude, so add Im(w)^2/ln(10) digits.
    # Loss beyond ~308 digits is irrelevant at double precision (the small
    # component underflows), so cap the padding there.
    extra = min(int(float(mp.im(w)) ** 2 / 2.302585), 310) + 15
    with mp.workdps(60 + extra):
        return mp.exp(w * w) * mp.erfc(w)


def fmt(x):
    return mp.nstr(x, 22, strip_zeros=False)


def gen_erfcx_grid():
    pts = []
    # polar grid over the right half-plane
    radii = [mp.mpf(10) ** (mp.mpf(e) / 6) for e in range(-48, 49)]  # 1e-8..1e8
    angles = [mp.pi * mp.mpf(k) / 36 for k in range(0, 19)]          # 0..pi/2
    for r in radii:
        for th in angles:
            pts.append((r * mp.cos(th), r * mp.sin(th)))
    # region-boundary bands
    for r in [mp.mpf('0.9'), mp.mpf('0.999'), mp.mpf(1), mp.mpf('1.001'),
              mp.mpf('1.1'), mp.mpf('27'), mp.mpf('27.5'), mp.mpf('28'), mp.mpf('30')]:
        for k in range(0, 13):
            th = mp.pi * mp.mpf(k) / 24
            pts.append((r * mp.cos(th), r * mp.sin(th)))
    # Voigt-line style points: small real part, wide imaginary range
    for a_exp in range(-12, 2):
        a = mp.mpf(10) ** a_exp
        for b in [mp.mpf('0.1'), mp.mpf(1), mp.mpf(2), mp.mpf(3), mp.mpf(4),
                  mp.mpf(5), mp.mpf(6), mp.mpf(8), mp.mpf(12), mp.mpf(18),
                  mp.mpf(26), mp.mpf(40), mp.mpf(1000), mp.mpf(10) ** 6]:
            pts.append((a, b))
    # Stokes band scan: where exp(a^2-b^2) competes with a/(sqrt(pi)|w|^2)
    for b10 in range(15, 270, 7):
        b = mp.mpf(b10) / 10
        a = mp.sqrt(mp.pi) * b * b * mp.exp(-b * b)  # balance point
        if a > 0:
            for scale in [mp.mpf('0.3'), mp.mpf(1), mp.mpf(3)]:
                pts.append((a * scale, b))
    # real and imaginary axes
    for e in range(-32, 33):
        r = mp.mpf(10) ** (mp.mpf(e) / 4)
        pts.append((r, mp.mpf(0)))
        pts.append((mp.mpf(0), r))
    # negative imaginary parts (conjugation path)
    for e in range(-8, 9):
        r = mp.mpf(10) ** (mp.mpf(e) / 2)
        pts.append((r, -r))

    with open(os.path.join(OUT, "erfcx_oracle.csv"), "w") as f:
        f.write("re_w,im_w,u,v\n")
        for (a, b) in pts:
            z = erfcx(mp.mpc(a, b))
            f.write(f"{fmt(a)},{fmt(b)},{fmt(z.real)},{fmt(z.imag)}\n")
    print(f"erfcx_oracle.csv: {len(pts)} points")


def gen_erfcx_derivs():
    # reference n-th derivatives at assorted points, via mpmath.diff
    pts = [(0, 0), (1, 0), (0.5, 0.5), (2, 3), (0.1, 7), (4, 0.25), (0, 2)]
    rows = []
    for (a, b) in pts:
        w = mp.mpc(a, b)
        extra = min(int(float(b) ** 2 / 2.302585), 310) + 15
        for n in range(1, 7):
            with mp.workdps(80 + extra):
                d = mp.diff(lambda z: mp.exp(z * z) * mp.erfc(z), w, n)
            rows.append((a, b, n, d))
    with open(os.path.join(OUT, "erfcx_derivative_oracle.csv"), "w") as f:
        f.write("re_w,im_w,order,re_d,im_d\n")
        for (a, b, n, d) in rows:
            f.write(f"{fmt(mp.mpf(a))},{fmt(mp.mpf(b))},{n},{fmt(d.real)},{fmt(d.imag)}\n")
    print(f"erfcx_derivative_oracle.csv: {len(rows)} rows")


def gen_voigt_pdf():
    # Voigt density reference by direct convolution quadrature (independent of
    # the erfcx representation): f(y) = int phi_sigma(y-x) cauchy_gamma(x) dx
    def pdf_conv(y, mu, sig, gam):
        yt = y - mu

        def integrand(u):
            x = gam * mp.tan(mp.pi * u)
            jac = gam * mp.pi / mp.cos(mp.pi * u) ** 2
            g = mp.exp(-((yt - x) / sig) ** 2 / 2) / (sig * mp.sqrt(2 * mp.pi))
            c = gam / (mp.pi * (x * x + gam * gam))
            return g * c * jac

        return mp.quad(integrand, [mp.mpf('-0.5'), 0, mp.mpf('0.5')])

    cases = [
        (0, 0, 1, 1), (1, 0, 1, 1), (5, 0, 1, 1), (-2.5, 0, 1, 1),
        (0.3, 0.1, 0.5, 2.0), (10, 1, 2, 0.3), (-4, 2, 0.25, 0.1),
        (0, 0, 1, 0.1), (2, 0, 1, 0.1), (100, 0, 1, 1),
    ]
    with open(os.path.join(OUT, "voigt_pdf_oracle.csv"), "w") as f:
        f.write("y,mu,sigma,gamma,pdf\n")
        for (y, mu, sig, gam) in cases:
            v = pdf_conv(mp.mpf(y), mp.mpf(mu), mp.mpf(sig), mp.mpf(gam))
            f.write(f"{fmt(mp.mpf(y))},{fmt(mp.mpf(mu))},{fmt(mp.mpf(sig))},{fmt(mp.mpf(gam))},{fmt(v)}\n")
    print(f"voigt_pdf_oracle.csv: {len(cases)} rows")


if __name__ == "__main__":
    gen_erfcx_grid()
    gen_erfcx_derivs()
    gen_voigt_pdf()
