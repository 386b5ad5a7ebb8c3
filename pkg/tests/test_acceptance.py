"""Every acceptance criterion at full scale, one PASS/FAIL line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines interleaved,
or read them from the captured output of a normal run.
"""
import json

import pytest

from qbl import verify

# seconds allowed per criterion
RUNTIME_LIMIT = {1: 10, 2: 60, 3: 120, 4: 120, 5: 30, 6: 5, 7: 600, 8: 60,
                 9: 60, 10: 600, 11: 1800, 12: 600}

SUMMARY = {
    1: "rho exact values and quadrature agreement within 1e-6",
    2: "Gauss sum closed form for odd q <= 99 within 1e-9",
    3: "S_q factored vs direct, zero cases, multiplicativity",
    4: "psi closed vs brute, vanishing off squares, psi(4), psi(9)",
    5: "n(p^t) factorized vs brute, deviation bound, n(3) = 2241",
    6: "prod (1 + p^-2) over p <= 1e5 within 1e-4 of 15/pi^2",
    7: "tau two routes overlap at tol 1e-3 and 5e-3",
    8: "Gram determinant, M4 = 19, box count vs naive",
    9: "lifted density 7/9, 23/27, limit 5/6, partial sums",
    10: "M1 slope within 10% at B = 1e6",
    11: "N(1) = 24, naive equivalence to 500, monotone ratios",
    12: "weighted count within 15% at P = 400",
}


def _line(res):
    status = "PASS" if res.passed and res.elapsed_seconds < RUNTIME_LIMIT[res.criterion] else "FAIL"
    return (f"criterion {res.criterion:2d} {status}  {res.name}: {SUMMARY[res.criterion]} "
            f"[{res.elapsed_seconds:.2f} s, limit {RUNTIME_LIMIT[res.criterion]} s]")


@pytest.mark.parametrize("name,criterion", [(n, c) for n, c, _ in verify.CHECKS],
                         ids=[n for n, _, _ in verify.CHECKS])
def test_criterion(name, criterion, capsys):
    res = verify.run_check(name, full=True)
    with capsys.disabled():
        print("\n" + _line(res))
        if criterion == 11:
            d = res.detail
            band = "met" if d["within_35pct_at_last_B"] else "NOT met"
            print(f"criterion 11 note  35% band at B = {d['B'][-1]}: {band}, "
                  f"ratios {', '.join(f'{r:.4f}' for r in d['ratios'])} (reported, not gated)")
    assert res.passed, json.dumps(res.detail, default=str)
    assert res.elapsed_seconds < RUNTIME_LIMIT[criterion]
