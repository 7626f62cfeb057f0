#!/usr/bin/env python3
"""Independent recomputation of the numeric constants pinned in the test suite.

Every value is derived here from first principles (closed forms and plain
float arithmetic, no project code), then compared against the frozen literals
that the C++ tests assert. Exits nonzero on any mismatch.
"""

import math
import sys


def norm_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def bs_call(x, strike, alpha, beta, t):
    """E[(X_T - K)^+] for dX = alpha X dt + beta X dW, X_0 = x (no discounting)."""
    fwd = x * math.exp(alpha * t)
    sd = beta * math.sqrt(t)
    d1 = (math.log(fwd / strike) + 0.5 * sd * sd) / sd
    return fwd * norm_cdf(d1) - strike * norm_cdf(d1 - sd)


def theory_constant(p, v, big_l, t, moment_root):
    s = math.sqrt(t) + v * p
    return 2.0 * math.sqrt(p - 1.0) * math.exp(3.0 * v * (1.0 + big_l * big_l * t * s * s)) * (1.0 + moment_root)


def theory_samples(c, big_c, eps):
    return max(1.0, math.ceil(c * c * big_c * big_c / (eps * eps)))


def extremum_param_count(d):
    """Total parameters of the layered running-extremum network in dimension d."""
    total = (2 * (d - 1) + 1) * (d + 1) + 2
    for k in range(1, d):
        total += (2 * (d - (k + 1)) + 1) * (2 * (d - k) + 2)
    return total


def main():
    ln_c4 = (
        math.exp(2.0)
        - 4.0 * math.exp(1.25)
        + 6.0 * math.exp(0.75)
        - 3.0 * math.exp(0.5)
    )
    big_c = theory_constant(2.0, 2.0, 0.0, 1.0, 0.0)

    checks = [
        ("theory_constant(2,2,0,1,0)", big_c, 806.8575869854702),
        ("theory_samples(1,C,0.1)", theory_samples(1.0, big_c, 0.1), 65101917.0),
        ("bs_call(100,100,0,0.2,1)", bs_call(100.0, 100.0, 0.0, 0.2, 1.0), 7.965567455405804),
        ("lognormal(0,1/2) mean", math.exp(0.125), 1.1331484530668263),
        ("lognormal(0,1/2) sd", math.sqrt(math.exp(0.5) - math.exp(0.25)), 0.6039005332108813),
        ("lognormal(0,1/2) central4", ln_c4, 1.1835205566589506),
        ("lognormal(0,1/2) central4^(1/4)", ln_c4 ** 0.25, 1.0430231588008418),
        ("uniform(0,1) sd", math.sqrt(1.0 / 12.0), 0.28867513459481287),
        ("uniform(0,1) central4", 1.0 / 80.0, 0.0125),
        ("uniform(0,1) central4^(1/4)", (1.0 / 80.0) ** 0.25, 0.334370152488211),
        ("bernoulli(1/2) sd", 0.5, 0.5),
        ("bernoulli(1/2) central4^(1/4)", (1.0 / 16.0) ** 0.25, 0.5),
        ("mean-deviation constant p=2", math.sqrt(2.0 - 1.0), 1.0),
        ("mean-deviation constant p=4", math.sqrt(4.0 - 1.0), 1.7320508075688772),
    ]
    for d, want in [(2, 15), (3, 44), (4, 99), (5, 188), (6, 319)]:
        checks.append((f"extremum_param_count({d})", float(extremum_param_count(d)), float(want)))
        bound = 6 * d ** 3
        checks.append((f"extremum_param_count({d}) <= 6d^3", float(extremum_param_count(d) <= bound), 1.0))
    for d in (2, 8, 32):
        checks.append((f"basket_param_count({d})", float(d + 3), float(d + 3)))

    failed = 0
    for name, got, want in checks:
        ok = got == want if want == 0.0 else abs(got - want) <= 1e-13 * abs(want)
        status = "ok  " if ok else "FAIL"
        print(f"[{status}] {name} = {got!r} (frozen {want!r})")
        failed += not ok
    if failed:
        print(f"{failed} mismatching constants", file=sys.stderr)
        return 1
    print(f"all {len(checks)} constants match")
    return 0


if __name__ == "__main__":
    sys.exit(main())
