"""Smoke tests for the python bindings."""

import math
import sys

import ispval


def approx(a, b, tol=1e-12):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def test_estimators():
    stats = [5.0, 1.0, 7.0, 2.0]
    logw = [0.0, 0.0, 0.0, 0.0]
    approx(ispval.p_hat(4.0, stats, logw), 0.5)
    approx(ispval.p_tilde(4.0, stats, logw), 0.5)
    # all log_w = 0, two of four draws exceed: p_tilde_star = 3/5
    approx(ispval.p_tilde_star(4.0, 0.0, stats, logw), 0.6)
    approx(ispval.p_hat_star(4.0, 0.0, stats, logw), 0.6)


def test_combine_and_wald():
    approx(ispval.two_sided_combine(0.01, 0.99), 0.02)
    approx(ispval.two_sided_combine(0.6, 0.7), 1.0)
    approx(ispval.wald_upper_limit(0.1, 0.01, 0.975), 0.1 + 1.959963984540054 * 0.01, 1e-9)


def test_special():
    approx(ispval.gaussian_true_pvalue(0.0), 0.5)
    approx(ispval.normal_cdf(0.0), 0.5)
    approx(ispval.normal_quantile(0.975), 1.959963984540054, 1e-11)


def test_lemma1():
    lhs, holds = ispval.lemma1_check([10.0, 5.0, 1.0], [0.25, 0.25, 0.25], 0.5)
    assert holds
    assert lhs <= 0.5


def test_bonferroni():
    rejected = ispval.bonferroni([0.004, 0.2], 0.05, 10)
    assert list(rejected) == [0]


def test_inversion():
    grid = [-1.0, 0.0, 1.0]
    out = ispval.invert_confidence_set(grid, lambda th: 0.5 if th == 0.0 else 0.01, 0.05)
    assert out["retained"] == [False, True, False]
    assert out["hull"] == (0.0, 0.0)
    assert out["contiguous"]


def test_ess():
    approx(ispval.ess_diagnostic([0.0, 0.0, 0.0]), 3.0)


def test_errors():
    try:
        ispval.p_hat(0.0, [1.0], [float("inf")])
    except ispval.IspvalError:
        pass
    else:
        raise AssertionError("expected IspvalError")


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print(f"ok {t.__name__}")
    print(f"{len(tests)} python smoke tests passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
