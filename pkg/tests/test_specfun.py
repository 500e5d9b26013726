import numpy as np
import pytest

from fptlevy import Accuracy, bessel_k, expint_ei, gamma_fn

# Reference values computed with mpmath at 25 significant digits.
EI_REFS = [
    (-1.0, -0.21938393439552027),
    (-25.0, -5.3488997553402166e-13),
    (-12.5, -2.7739445440052399e-07),
    (0.001, -6.3295393640250382),
    (-0.001, -6.3315393641361493),
    (15.0, 234955.8524907683),
    (700.0, 1.4509787360525609e301),
    (3 + 4j, -4.1540916516426898 + 1.1528259664345642j),
    (-8 + 0.5j, -3.1928599493546178e-05 - 1.9865951036773354e-05j),
    (10 + 10j, -1576.1504265768517 + 433.77763904754302j),
    (-30 + 2j, 1.429028103056685e-15 - 2.6551085765498939e-15j),
    (0.5 - 0.2j, 0.51440367989856742 + 2.5022465747368433j),
    (-0.75 - 3j, 0.076664208579025888 - 0.10925398406335798j),
    (5j, -0.19002974965664388 - 0.020865081850222482j),
    (-2 - 40j, 0.0026733254352790512 - 0.0020549491223348511j),
]


@pytest.mark.parametrize("w,expected", EI_REFS)
def test_expint_ei_reference_values(w, expected):
    got = expint_ei(w)
    assert abs(got - expected) <= 5e-13 * abs(expected)


def test_expint_ei_derivative_identity():
    # d/dw Ei(w) = e^w / w, central difference at fixed complex points
    rng = np.random.default_rng(42)
    for _ in range(20):
        w = complex(rng.uniform(-8, 8), rng.uniform(0.3, 8) * rng.choice([-1, 1]))
        h = 1e-5 * max(1.0, abs(w))
        fd = (expint_ei(w + h) - expint_ei(w - h)) / (2 * h)
        exact = np.exp(w) / w
        assert abs(fd - exact) <= 1e-6 * abs(exact)


@pytest.mark.parametrize("w", [3 + 4j, -8 + 0.5j, 10 + 10j, -2 - 40j, 0.5 - 0.2j])
def test_expint_ei_schwarz_reflection(w):
    assert np.conj(expint_ei(w)) == expint_ei(np.conj(w))


def test_expint_ei_domain_errors():
    with pytest.raises(ValueError):
        expint_ei(0.0)
    with pytest.raises(ValueError):
        expint_ei(800.0)  # e^w overflows float64


def test_expint_ei_deterministic():
    w = -3.7 + 1.2j
    assert expint_ei(w) == expint_ei(w)


def test_accuracy_validation():
    Accuracy(rel_tol=1e-10, max_terms=200)
    with pytest.raises(ValueError):
        Accuracy(rel_tol=0.0)
    with pytest.raises(ValueError):
        Accuracy(rel_tol=1e-3)
    with pytest.raises(ValueError):
        Accuracy(max_terms=10)


# Reference values computed with mpmath at 25 significant digits.
BESSEL_REFS = [
    (0.5, 1.0, 0.46106850444789456),
    (-0.5, 1.0, 0.46106850444789456),
    (1.5, 2.0, 0.17990665795209217),
    (2.5, 1.3, 1.5226914007398955),
    (0.0, 2.0, 0.11389387274953344),
    (7.5, 0.3, 1409014685.6587042),
    (0.37, 1.7, 0.17096441095195826),
    (125.5, 40.0, 1.8527341682235492e43),
    (3.0, 0.5, 62.057909529930256),
    (0.5, 0.001, 39.593659513116643),
    (12.5, 200.0, 1.8094554794047926e-88),
]


@pytest.mark.parametrize("order,x,expected", BESSEL_REFS)
def test_bessel_k_reference_values(order, x, expected):
    assert abs(bessel_k(order, x) - expected) <= 1e-9 * abs(expected)


def test_bessel_k_order_symmetry():
    for order, x in [(0.3, 1.1), (1.7, 0.4), (4.25, 6.0)]:
        assert bessel_k(-order, x) == pytest.approx(bessel_k(order, x), rel=1e-12)


def test_bessel_k_decreasing_in_x():
    xs = np.linspace(0.2, 8.0, 40)
    for order in (0.0, 0.5, 1.5, 3.2):
        vals = np.array([bessel_k(order, float(x)) for x in xs])
        assert np.all(np.diff(vals) < 0)


def test_bessel_k_log_convex_in_order():
    # K_{(a+b)/2}(x)^2 <= K_a(x) K_b(x)
    for a, b, x in [(0.3, 1.1, 2.0), (0.5, 2.5, 0.7), (1.0, 4.0, 5.0)]:
        mid = bessel_k((a + b) / 2, x)
        assert mid * mid <= bessel_k(a, x) * bessel_k(b, x) * (1 + 1e-12)


def test_bessel_k_domain_error():
    with pytest.raises(ValueError):
        bessel_k(0.5, 0.0)
    with pytest.raises(ValueError):
        bessel_k(0.5, -1.0)


# Reference values computed with mpmath at 25 significant digits.
GAMMA_REFS = [
    (0.5, 1.772453850905516),
    (1.0, 1.0),
    (3.5, 3.3233509704478426),
    (0.05, 19.470085311255512),
    (171.0, 7.257415615307999e306),
]


@pytest.mark.parametrize("x,expected", GAMMA_REFS)
def test_gamma_fn_reference_values(x, expected):
    assert abs(gamma_fn(x) - expected) <= 1e-12 * abs(expected)


def test_gamma_fn_domain_error():
    with pytest.raises(ValueError):
        gamma_fn(0.0)
    with pytest.raises(ValueError):
        gamma_fn(-2.5)
