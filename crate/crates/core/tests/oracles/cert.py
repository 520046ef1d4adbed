"""High-precision references for the bound-state certificate.

The quadratic coefficient A is transcribed independently here and evaluated
with mpmath at 40 digits. The trial energy is evaluated from the closed
Gaussian moments (E1 = 1/(2 beta), E2 = sqrt(pi)/(4 beta^1.5),
E3 = 1/(2 beta^2)) and, for g = 0, by 2-D mpmath quadrature.

Writes ../fixtures/cert.json.
"""
import json
import os

from mpmath import mp, mpf, pi, cosh, sinh, exp, sqrt, coth, csch, matrix, lu_solve, quad, inf

HERE = os.path.dirname(os.path.abspath(__file__))
mp.dps = 40
THETA0 = mpf("0.590106125")


def coeff_a(al, a):
    s = (
        -4 * a * pi
        + (3 - 2 * a + 3 * a ** 2) * pi * cosh(pi)
        + (a - 1) * pi * ((a - 1) * cosh(pi - 2 * al) + 4 * cosh(pi - al) - 4 * a * cosh(al))
        - 8 * (al + a ** 2 * (pi - al)) * sinh(pi)
    )
    return -csch(pi) * s / 64


def p_poly(al, a, x, th=THETA0):
    return coeff_a(al, a) * x ** 2 - pi / 2 * abs(a) * th * x + pi / 2


def moments_energy(al, a, beta, c1, c2, c3, th=THETA0):
    c4 = c1 + c2 - c3
    e1 = 1 / (2 * beta)
    e2 = sqrt(pi) / (4 * beta ** mpf(1.5))
    e3 = 1 / (2 * beta ** 2)

    def sq(p, q, lo, hi):
        # integral of g^2 + g'^2 = 2(p^2 e^{2t} + q^2 e^{-2t})
        return p ** 2 * (exp(2 * hi) - exp(2 * lo)) - q ** 2 * (exp(-2 * hi) - exp(-2 * lo))

    def jump(p, q, lo, hi):
        return (p * exp(hi) + q * exp(-hi)) - (p * exp(lo) + q * exp(-lo))

    lo = -pi + al
    # rho-moments: int rho e^{-beta rho^2} = E1, int rho^2 e^{-beta rho^2} = E2,
    # int rho^3 e^{-beta rho^2} = E3
    kin = e1 * (sq(c1, c2, lo, 0) + sq(c3, c4, 0, al))
    cross = -e2 * (a * jump(c1, c2, lo, 0) + jump(c3, c4, 0, al))
    radial = beta ** 2 * pi * e3
    pot = (al + a ** 2 * (pi - al)) / 4 * e3
    norm = pi * e1
    return kin + cross + radial + pot - abs(a) * th * norm


def energy_quad_g0(al, a, beta, th=THETA0):
    """Direct 2-D quadrature of the integrand with g = 0."""
    def f(rho, t):
        s = a if t < 0 else 1
        d = -s * rho / 2
        return (beta ** 2 * rho ** 2 + d ** 2 - abs(a) * th) * exp(-beta * rho ** 2) * rho

    return quad(f, [0, inf], [-pi + al, 0]) + quad(f, [0, inf], [0, al])


def copt_printed(al, a, beta):
    k = sqrt(pi) * (coth(pi) - 1) / (16 * sqrt(beta))
    c1 = exp(pi - 2 * al) * ((a - 1) * exp(pi) + (a - 1) * exp(pi + 2 * al) + 2 * exp(al) * (exp(pi) - a)) * k
    c2 = ((a - 1) + (a - 1) * exp(2 * al) - 2 * (a * exp(pi) - 1) * exp(al)) * k
    c3 = exp(-al) * (exp(pi) - a + (a - 1) * cosh(pi - al)) * csch(pi) * sqrt(pi) / (8 * sqrt(beta))
    return c1, c2, c3


def copt_normal(al, a, beta):
    f = lambda c: moments_energy(al, a, beta, c[0], c[1], c[2])
    f0 = f([mpf(0)] * 3)
    h = matrix(3, 3)
    g = matrix(3, 1)
    e = [[mpf(int(i == j)) for j in range(3)] for i in range(3)]
    for i in range(3):
        fp = f(e[i])
        fm = f([-v for v in e[i]])
        g[i] = (fp - fm) / 2
        h[i, i] = fp + fm - 2 * f0
    for i in range(3):
        for j in range(i + 1, 3):
            eij = [e[i][k] + e[j][k] for k in range(3)]
            h[i, j] = h[j, i] = f(eij) - f0 - g[i] - g[j] - h[i, i] / 2 - h[j, j] / 2
    c = lu_solve(h, -g)
    return [c[0], c[1], c[2]]


def certify(al, a, th):
    A = coeff_a(al, a)
    if A <= 0:
        return {"A": float(A), "x_star": None, "p_min": None, "admissible": True}
    x = pi / 4 * abs(a) * th / A
    pm = p_poly(al, a, x, th)
    return {"A": float(A), "x_star": float(x), "p_min": float(pm), "admissible": bool(pm < 0)}


def main():
    th_low = THETA0 - mpf("1e-9")
    coeffs = []
    for al, a in [(pi / 2, -1), (pi / 2, mpf("-0.5")), (pi / 3, mpf("-0.8")), (2 * pi / 3, mpf("0.5")),
                  (pi / 4, mpf("0.9")), (pi / 2, 0), (pi / 5, 0), (4 * pi / 5, 0), (pi / 3, mpf("0.3")),
                  (2 * pi / 3, mpf("0.3"))]:
        coeffs.append({"alpha": float(al), "a": float(a), "A": float(coeff_a(al, a)), "A_str": mp.nstr(coeff_a(al, a), 30)})
    cert = []
    for al, a in [(pi / 2, -1), (pi / 2, mpf("0.9")), (mpf("0.45") * pi, mpf("-0.95")), (mpf("0.2") * pi, mpf("-0.3"))]:
        r = certify(al, a, th_low)
        r.update({"alpha": float(al), "a": float(a), "theta0": float(th_low)})
        cert.append(r)
    samples = []
    alphas = [mpf(k) / 20 * pi for k in (4, 7, 10, 13, 16)]
    avals = [mpf(s) for s in ("-0.9", "-0.5", "-0.2", "0.3", "0.7")]
    for al in alphas:
        for a in avals:
            for beta in (mpf("0.5"), mpf(1), mpf(2)):
                cp = copt_printed(al, a, beta)
                cn = copt_normal(al, a, beta)
                samples.append({
                    "alpha": float(al), "a": float(a), "beta": float(beta),
                    "c_printed": [float(v) for v in cp],
                    "c_normal": [float(v) for v in cn],
                    "energy_moments": float(moments_energy(al, a, beta, *cp)),
                    "p_at_inv_beta": float(p_poly(al, a, 1 / beta)),
                })
    zero_g = []
    for al, a, beta in [(pi / 2, mpf(-1), mpf(1)), (pi / 3, mpf("-0.6"), mpf("0.7")), (mpf("0.8") * pi, mpf("0.4"), mpf(2))]:
        zero_g.append({
            "alpha": float(al), "a": float(a), "beta": float(beta),
            "energy_moments": float(moments_energy(al, a, beta, 0, 0, 0)),
            "energy_quad": float(energy_quad_g0(al, a, beta)),
        })
    out = {"theta0": float(THETA0), "coeff_a": coeffs, "certify": cert, "trial": samples, "zero_g": zero_g}
    with open(os.path.join(HERE, "..", "fixtures", "cert.json"), "w") as f:
        json.dump(out, f, indent=1)
    worst = max(abs(s["energy_moments"] - s["p_at_inv_beta"]) / (1 + abs(s["p_at_inv_beta"])) for s in samples)
    cdiff = max(abs(x - y) for s in samples for x, y in zip(s["c_printed"], s["c_normal"]))
    print("max |I - P| rel", worst, "max |c_printed - c_normal|", cdiff)
    print(cert)
    print(zero_g)


if __name__ == "__main__":
    main()
