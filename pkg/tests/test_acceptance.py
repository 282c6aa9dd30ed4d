"""Acceptance criteria 1-10.

Each ``check_N`` returns ``(ok, detail)``; the pytest wrappers print one
PASS/FAIL line per criterion and then assert.  Run the file directly to get
the ten lines without pytest.
"""

import contextlib
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from families import all_families, random_point  # noqa: E402
from oracles import example_signal, mp_central_difference, relative_entry_error  # noqa: E402

from genuniq.apps.sobi import (  # noqa: E402
    TABLE_EXPECTED,
    random_sobi_instance,
    sobi_build,
    sobi_factors,
    sobi_model,
    sobi_reformulate,
    vec,
)
from genuniq.apps.sources import example_model, exp_poly_model, rational_model  # noqa: E402
from genuniq.apps.trig import cheb_P, eval_exact, poly_add, poly_mul, tan_half_QR  # noqa: E402
from genuniq.certify import certify_generic_uniqueness  # noqa: E402
from genuniq.cli import main  # noqa: E402
from genuniq.errors import PoleError, TransformSingular  # noqa: E402
from genuniq.model import eval_b, jacobian_r  # noqa: E402
from genuniq.solve import empirical_uniqueness_test  # noqa: E402

MODELS = Path(__file__).resolve().parent.parent / "models"


def _cli_json(*argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main([str(a) for a in argv] + ["--format", "json"])
    return code, buf.getvalue()


def check_1():
    t0 = time.perf_counter()
    code, out = _cli_json("sobi-table")
    elapsed = time.perf_counter() - t0
    d = json.loads(out)
    values_ok = all(d[k] == list(v) for k, v in TABLE_EXPECTED.items())
    ok = code == 0 and values_ok and elapsed < 1.0
    return ok, f"21 table values exact={values_ok}, exit={code}, {elapsed:.2f}s (< 1 s)"


def check_2():
    parts, ok = [], True
    for I in (3, 4, 5):
        t0 = time.perf_counter()
        rep = certify_generic_uniqueness(sobi_model(I, 40), seed=0)
        elapsed = time.perf_counter() - t0
        agree = rep.assumptions[4].evidence.get("agreement") and rep.assumptions[5].evidence.get("agreement")
        good = (
            rep.certified_max_r == (I - 1) ** 2
            and rep.n_hat == I * I
            and rep.l_hat == 2 * I - 1
            and rep.scaling_invariant == "true"
            and bool(agree)
            and elapsed < 30
        )
        ok &= good
        parts.append(f"I={I}: max_R={rep.certified_max_r} N_hat={rep.n_hat} l_hat={rep.l_hat} {elapsed:.2f}s")
    return ok, "; ".join(parts)


def check_3():
    t0 = time.perf_counter()
    model, bound = exp_poly_model(1, (1,), 10, K=7, R=7)
    rep = certify_generic_uniqueness(model, seed=0)
    elapsed = time.perf_counter() - t0
    ok = rep.certified_max_r == 7 == bound and elapsed < 10
    return ok, f"certified_max_R={rep.certified_max_r} (expected 7), {elapsed:.2f}s"


def check_4():
    t0 = time.perf_counter()
    model, bound = rational_model(1, 1, 10, K=10)
    rep = certify_generic_uniqueness(model, seed=0)
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(20):
        x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        J = jacobian_r(model.column, x)
        worst = max(worst, np.linalg.norm(J @ x) / (np.linalg.norm(J) * np.linalg.norm(x)))
    elapsed = time.perf_counter() - t0
    ok = rep.certified_max_r == 7 == bound and rep.l_hat == 3 and worst < 1e-10 and elapsed < 10
    return ok, f"certified_max_R={rep.certified_max_r} l_hat={rep.l_hat} max|Jx|/(|J||x|)={worst:.1e}, {elapsed:.2f}s"


def check_5():
    t0 = time.perf_counter()
    model, bound = example_model(20)
    rep = certify_generic_uniqueness(model, seed=0)
    rng = np.random.default_rng(5)
    worst, done = 0.0, 0
    while done < 20:
        z = rng.uniform(-2, 2, 6)
        try:
            b = eval_b(model.column, z)
        except (PoleError, TransformSingular):
            continue
        ref = example_signal(z, 20)
        worst = max(worst, float(np.max(np.abs(b - ref) / np.maximum(1, np.abs(ref)))))
        done += 1
    elapsed = time.perf_counter() - t0
    ok = rep.certified_max_r == 14 == bound and worst < 1e-10 and elapsed < 20
    return ok, f"certified_max_R={rep.certified_max_r} (expected 14), eval_b vs trig form {worst:.1e}, {elapsed:.2f}s"


def check_6():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst, exact = 0.0, True
    for n in range(1, 21):
        P = cheb_P(n)
        Q, R = tan_half_QR(n)
        lhs = poly_add(poly_mul(list(Q.numerator), list(Q.numerator)), poly_mul(list(R.numerator), list(R.numerator)))
        exact &= lhs == poly_mul(list(Q.denominator), list(Q.denominator))
        for z in rng.uniform(-math.pi, math.pi, 100):
            z = float(z)
            t = math.tan(z / 2)
            worst = max(
                worst,
                abs(math.cos(n * z) - float(eval_exact(P, math.cos(z)))),
                abs(math.cos(n * z) - Q(t)),
                abs(math.sin(n * z) - R(t)),
            )
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and exact and elapsed < 5
    return ok, f"max identity error {worst:.1e} (< 1e-9), exact Q^2+R^2=1: {exact}, {elapsed:.2f}s"


def check_7():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        I, P, R = rng.integers(2, 6), rng.integers(1, 6), rng.integers(1, 5)
        inst = random_sobi_instance(int(I), int(P), int(R), rng)
        for m in inst.M.T:
            worst = max(worst, float(np.max(np.abs(vec(np.outer(m, m.conj())) - np.kron(m.conj(), m)))))
        A, B = sobi_factors(inst)
        worst = max(worst, float(np.max(np.abs(sobi_reformulate(sobi_build(inst)) - A @ B.T))))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-12 and elapsed < 1
    return ok, f"max identity error {worst:.1e} (< 1e-12), {elapsed:.2f}s"


def check_8():
    t0 = time.perf_counter()
    model, _ = rational_model(1, 1, 12, K=5, R=2)
    converged = matched = 0
    worst = 0.0
    for seed in range(5):
        rep = empirical_uniqueness_test(model, seed=seed, restarts=20)
        converged += rep.converged
        matched += rep.matched
        worst = max([worst] + [f["discrepancy"] for f in rep.fits if f["converged"]])
    elapsed = time.perf_counter() - t0
    ok = converged > 0 and matched == converged and worst < 1e-6 and elapsed < 120
    return ok, f"{matched}/{converged} converged fits match, max discrepancy {worst:.1e}, {elapsed:.1f}s"


def check_9():
    t0 = time.perf_counter()
    fams = all_families()
    names = sorted(fams)
    rng = np.random.default_rng(9)
    worst = 0.0
    for k in range(50):
        name = names[k % len(names)]
        cm = fams[name]
        x = random_point(cm, rng)
        worst = max(worst, relative_entry_error(jacobian_r(cm, x), mp_central_difference(name, x, cm.N)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-5 and elapsed < 5
    return ok, f"50 (model, point) pairs, max relative entry error {worst:.1e} (< 1e-5), {elapsed:.2f}s"


def check_10():
    results = []
    for cmd, model in (("certify", "example_N20.model"), ("verify", "rational_p1q1_N12_K5_R2.model")):
        first = _cli_json(cmd, MODELS / model, "--seed", "12345")
        second = _cli_json(cmd, MODELS / model, "--seed", "12345")
        results.append((cmd, first == second and first[1] != ""))
    ok = all(same for _, same in results)
    return ok, ", ".join(f"{cmd} byte-identical={same}" for cmd, same in results)


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9, check_10]


def _line(k, ok, detail):
    return f"acceptance {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("k", range(1, 11))
def test_acceptance(k, capsys):
    ok, detail = CHECKS[k - 1]()
    with capsys.disabled():
        print("\n" + _line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for k, check in enumerate(CHECKS, start=1):
        ok, detail = check()
        failures += not ok
        print(_line(k, ok, detail))
    sys.exit(1 if failures else 0)
