import io
import itertools

import pytest

from conftest import CRITERIA
from oracles import BATTERY, REAL_SPECS
from realdet import cli
from realdet.deformation_cocycle import gamma_lie, log_derivative_defect
from realdet.deformations import VectorField

GRID = dict(n_theta=256, n_x=129, M=48)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA[n] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def check_all():
    runs = []
    for _ in range(2):
        out, err = io.StringIO(), io.StringIO()
        code = cli.main(["check", "all", "--seed", "7"], stdout=out, stderr=err)
        runs.append((code, out.getvalue()))
    rows = {}
    for line in runs[0][1].splitlines()[2:]:
        suite, name, defect, tol, status = line.split(",")
        rows[suite, name] = (float(defect), float(tol), status)
    return runs, rows


def suite_criterion(n, rows, suite, names, limits):
    worst = []
    ok = True
    for name, limit in zip(names, limits):
        defect, _, status = rows[suite, name]
        ok &= status == "PASS" and defect <= limit
        worst.append(f"{name}={defect:.2e}")
    report(n, ok, " ".join(worst))


def test_criterion_01_battery():
    worst, slowest = 0.0, 0.0
    for v, w, c, _ in BATTERY:
        res = gamma_lie(VectorField.parse(v), VectorField.parse(w), c, **GRID)
        worst = max(worst, res.rel_err)
        slowest = max(slowest, res.wall_ms / 1000)
    report(1, worst <= 2e-2 and slowest <= 60, f"max rel_err={worst:.2e} slowest={slowest:.1f}s")


def test_criterion_02_real_fields():
    worst = 0.0
    for v, w in itertools.combinations_with_replacement(REAL_SPECS, 2):
        res = gamma_lie(VectorField.parse(v), VectorField.parse(w), 24.0, **GRID)
        worst = max(worst, abs(res.gamma))
    report(2, worst <= 2.4e-2, f"max |gamma|={worst:.2e} over 15 pairs")


def test_criterion_03_linear_in_c():
    v, w = VectorField.parse("cos(1)"), VectorField.parse("i*sin(1)")
    one = gamma_lie(v, w, 1.0, **GRID).gamma
    two = gamma_lie(v, w, 2.0, **GRID).gamma
    rel = abs(two - 2 * one) / abs(2 * one)
    report(3, rel <= 1e-10, f"rel={rel:.2e}")


def test_criterion_04_pairing(check_all):
    suite_criterion(4, check_all[1], "pairing",
                    ["antisymmetry", "cocycle_20_triples", "diffeo_invariance_5_maps"], [0.0, 1e-8, 1e-6])


def test_criterion_05_uniformization(check_all):
    names, limits = [], []
    for case in ("identity", "vertical_translation", "rotation"):
        names += [f"{case}_tau", f"{case}_residual"]
        limits += [1e-10, 1e-8]
    suite_criterion(5, check_all[1], "uniformize", names + ["tau_M_doubling_5_flows"], limits + [1e-9])


def test_criterion_06_normalization(check_all):
    suite_criterion(6, check_all[1], "cocycle", ["identity_normalization", "cutoff_swap"], [1e-8, 1e-6])


def test_criterion_07_sewing(check_all):
    suite_criterion(7, check_all[1], "detline", ["sewing_cocycle_10_triples", "gamma_positive"], [1e-8, 0.0])


def test_criterion_08_zeta_pa(check_all):
    names = ["pa_vs_liouville_10_sigma", "zeta0"] + [f"scheme_gap_tau_{t}" for t in ("0.5", "1", "2")]
    suite_criterion(8, check_all[1], "zeta", names, [1e-8, 1e-6, 1e-6, 1e-6, 1e-6])


def test_criterion_09_log_derivative():
    pairs = [("cos(1)", "i*sin(1)"), ("i*cos(2)", "sin(1), 0.5"), ("cos(1),i*-1*sin(1)", "1")]
    worst = max(log_derivative_defect(VectorField.parse(v), VectorField.parse(w)) for v, w in pairs)
    report(9, worst <= 1e-6, f"max defect={worst:.2e}")


def test_criterion_10_determinism(check_all):
    (c1, a), (c2, b) = check_all[0]
    report(10, c1 == 0 and c2 == 0 and a == b, f"exit codes {c1},{c2}; {len(a)} bytes identical={a == b}")
