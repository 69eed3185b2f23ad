import mpmath
import numpy as np

from ssmcascade import ddouble as dd


def test_two_prod_exact(rng):
    a, b = rng.standard_normal(100), rng.standard_normal(100)
    p, e = dd._two_prod(a, b)
    for x, y, hi, lo in zip(a, b, p, e):
        assert mpmath.mpf(x) * mpmath.mpf(y) == mpmath.mpf(hi) + mpmath.mpf(lo)


def test_matmul_against_mpmath(rng):
    with mpmath.workdps(50):
        a = mpmath.matrix(rng.standard_normal((6, 6)).tolist()) / 3
        b = mpmath.matrix(rng.standard_normal((6, 6)).tolist()) / 7
        for i in range(6):
            for j in range(6):
                a[i, j] += mpmath.mpf(1) / (3 * (i + j + 1)) * mpmath.mpf(2) ** -60
        got = dd.to_mpmath(dd.dd_matmul(dd.from_mpmath(a), dd.from_mpmath(b)))
        ref = a * b
        assert mpmath.mnorm(got - ref, 1) <= mpmath.mpf(1e-30) * mpmath.mnorm(ref, 1)


def test_repeated_squares_against_mpmath(rng):
    x = rng.uniform(-1, 1, (4, 4))
    x *= 0.95 / np.linalg.norm(x, 2)
    with mpmath.workdps(50):
        ref = mpmath.matrix(x.tolist())
        for _ in range(6):
            ref = ref * ref
        got = dd.to_mpmath(dd.dd_repeated_squares((x, np.zeros_like(x)), 7)[-1])
        assert mpmath.mnorm(got - ref, 1) <= mpmath.mpf(1e-29) * mpmath.mnorm(ref, 1)


def test_hippo_bilinear_diagonal():
    with mpmath.workdps(40):
        delta = mpmath.mpf("0.0005")
        a = dd.hippo_bilinear_mp(6, "0.0005")
        for n in range(1, 7):
            lam = -(n + 1)
            expected = (1 + delta * lam / 2) / (1 - delta * lam / 2)
            assert abs(a[n - 1, n - 1] - expected) < mpmath.mpf(10) ** -38
        assert a[0, 5] == 0
