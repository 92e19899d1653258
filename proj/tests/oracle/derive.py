"""Independent high-precision reference values for the test suite (mpmath).

Run: python3 tests/oracle/derive.py
The printed numbers are frozen into the C++ tests.
"""
import mpmath as mp

mp.mp.dps = 40
a = 1 / mp.sqrt(2)
OM = [a * (1 + 1j), a * (-1 + 1j)]


def fund(x, n):
    out = []
    for w in OM:
        z = mp.mpc(w) ** n * mp.exp(w * x)
        out += [z.real, z.imag]
    return out


def pinned_basis():
    rows = [fund(0, 0), fund(0, 1), fund(1, 0), fund(1, 2)]
    inv = mp.inverse(mp.matrix(rows))
    return inv[:, 0:2]


def full_basis():
    rows = [fund(0, 0), fund(0, 1), fund(1, 0), fund(1, 1)]
    return mp.inverse(mp.matrix(rows))


def gram_and_j(c):
    n = c.cols
    def b(j, d, x):
        f = fund(x, d)
        return sum(c[m, j] * f[m] for m in range(4))
    g = mp.matrix(n, n)
    m = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            g[i, j] = mp.quad(lambda x: b(i, 2, x) * b(j, 2, x) + b(i, 0, x) * b(j, 0, x), [0, 1])
            m[i, j] = -mp.quad(lambda x: b(j, 4, x) * b(i, 2, x) + b(j, 2, x) * b(i, 0, x), [0, 1])
    return g, mp.inverse(g) * m


def gap(g, x, y):
    l = mp.cholesky(g)
    def proj(v):
        w = l.T * v
        q, _ = mp.qr(w)
        q = q[:, : v.cols]
        return q * q.T
    p = proj(x) - proj(y)
    return max(mp.svd_r(p, compute_uv=False))


def main():
    c = pinned_basis()
    g, j = gram_and_j(c)
    print("pinned gram", [mp.nstr(v, 17) for v in g])
    print("pinned jmat", [mp.nstr(v, 17) for v in j])
    ginv = mp.inverse(g)
    u0 = mp.sqrt(ginv[0, 0])  # trace u(0) of the unit vector spanning D_F^perp
    print("DFperp u(0)", mp.nstr(u0, 17))

    # chart coordinate of the Neumann line over D_F^perp
    q = mp.matrix([ginv[0, 0], ginv[1, 0]]) / u0
    jq = j * q
    x = mp.matrix([1, 0])
    aa = (q.T * g * x)[0]
    bb = (jq.T * g * x)[0]
    print("sigma neumann over DFperp", mp.nstr(-bb / aa, 17))

    kappa = mp.findroot(lambda k: k - 5 * mp.tanh(k), 5)
    print("robin(5,1) kappa", mp.nstr(kappa, 20), "lambda", mp.nstr(-kappa ** 2, 20))
    for guess in [3.8, 7.2]:
        w = mp.findroot(lambda w: w * mp.cos(w) - 5 * mp.sin(w), guess)
        print("robin(5,1) positive", mp.nstr(w ** 2, 20))
    for eps in ["0.1", "0.01", "0.001"]:
        e = mp.mpf(eps)
        k = mp.findroot(lambda k: mp.tanh(k) - e * k, 1 / e)
        print("dive eps", eps, "lambda", mp.nstr(-k ** 2, 20))

    # F_{D_F}(lambda) by the exact series: c_k = sqrt2 k pi u(0), lambda_k = (k pi)^2
    for lam in [-10, -50, 5, 40]:
        lam = mp.mpf(lam)
        term = lambda k: 2 * (k * mp.pi) ** 2 * u0 ** 2 * (1 + lam * (k * mp.pi) ** 2) / (
            (1 + (k * mp.pi) ** 4) * ((k * mp.pi) ** 2 - lam))
        print("F_DF", mp.nstr(lam, 5), mp.nstr(mp.nsum(term, [1, mp.inf]), 17))

    # gap(K_lambda, D_F), pinned: kernel sinh(kappa(1-x)), traces (sinh k, -k cosh k)
    df = mp.matrix([[0], [1]])
    for lam in [-10, -100, -1000, -10000]:
        k = mp.sqrt(-lam)
        kt = mp.matrix([[mp.tanh(k)], [-k]])
        print("pinned flow gap", lam, mp.nstr(gap(g, kt, df), 17))

    cf = full_basis()
    gf, jf = gram_and_j(cf)
    dff = mp.matrix([[0, 0], [1, 0], [0, 0], [0, 1]])
    for lam in [-10, -100, -1000, -10000]:
        k = mp.sqrt(-lam)
        # traces of exp(-kx) and exp(-k(1-x))
        kt = mp.matrix([[1, mp.exp(-k)], [-k, k * mp.exp(-k)], [mp.exp(-k), 1], [-k * mp.exp(-k), k]])
        print("full flow gap", lam, mp.nstr(gap(gf, kt, dff), 17))


if __name__ == "__main__":
    main()
