import json
import math

import numpy as np
import pytest

from qms import defects_mc as mc
from qms.errors import ConvergenceFailure, InvalidArgument
from qms.io import read_csv


@pytest.mark.parametrize("eps,n,f,want", [
    (0.0, 529, 0.9, 0.9),
    (0.001, 529, 0.99, 0.99 * 0.999**529),
    (0.01, 0, 0.5, 0.5),
    (1.0, 1, 1.0, 0.0),
])
def test_depolarization(eps, n, f, want):
    assert mc.depolarization_fidelity(eps, n, f) == pytest.approx(want)


def test_depolarization_anchor():
    assert mc.depolarization_fidelity(0.001, 529, 0.99) == pytest.approx(0.583, abs=1e-3)


@pytest.mark.parametrize("args", [(-0.1, 5, 0.9), (0.1, 2.5, 0.9), (0.1, 5, 1.2), (0.1, -1, 0.5)])
def test_depolarization_validation(args):
    with pytest.raises(InvalidArgument):
        mc.depolarization_fidelity(*args)


def test_realization_seed_is_counter_based():
    a = mc.realization_seed(7, 1, 3)
    assert a == mc.realization_seed(7, 1, 3)
    assert len({mc.realization_seed(7, i, k) for i in range(3) for k in range(50)}) == 150
    assert mc.realization_seed(8, 1, 3) != a


SMALL = dict(nx=7, ny=7, spacing=0.2, waist=0.6, alpha=2.0)


def test_defect_scan_small_and_deterministic():
    kw = dict(SMALL, fractions=(0.0, 0.1), seed=3, stderr_tol=0.02, min_real=10, max_real=400)
    a = mc.fidelity_vs_defects(threads=1, **kw)
    b = mc.fidelity_vs_defects(threads=3, **kw)
    assert a.fidelity_mean == b.fidelity_mean
    assert a.realizations_used == b.realizations_used
    assert a.config_digest == b.config_digest
    assert a.fidelity_mean[0] == 1.0 and a.realizations_used[0] == 1
    assert 0 < a.fidelity_mean[1] < 1
    assert a.realizations_used[1] >= 10 and a.fidelity_stderr[1] < 0.02


def test_ideal_reference_scores_lower():
    kw = dict(SMALL, fractions=(0.0,), seed=0)
    ideal = mc.fidelity_vs_defects(reference="ideal", **kw).fidelity_mean[0]
    assert 0 < ideal < 1


def test_convergence_failure_carries_partial():
    with pytest.raises(ConvergenceFailure) as exc:
        mc.fidelity_vs_defects(fractions=(0.0, 0.3), seed=1, stderr_tol=1e-6,
                               min_real=4, max_real=12, **SMALL)
    part = exc.value.partial
    assert part.abscissa == [0.0, 0.3]
    assert part.realizations_used == [1, 12]
    assert exc.value.estimate > 1e-6


@pytest.mark.parametrize("kw", [
    dict(fractions=(1.2,)), dict(fractions=()), dict(min_real=1), dict(min_real=10, max_real=5),
    dict(stderr_tol=0.0), dict(reference="best"), dict(threads=0),
])
def test_defect_scan_validation(kw):
    with pytest.raises(InvalidArgument):
        mc.fidelity_vs_defects(**dict(SMALL, **kw))


def test_size_scan_and_outputs(tmp_path):
    res = mc.fidelity_vs_size([5, 9], spacing=0.2, waist=0.6, alpha=2.0)
    assert res.abscissa == pytest.approx([1.0, 1.8])
    assert all(0 < f <= 1 for f in res.fidelity_mean)
    path = res.to_csv(tmp_path / "size.csv")
    header, rows = read_csv(path)
    assert header == ["abscissa", "mean", "stderr", "n"]
    assert float(rows[1][1]) == res.fidelity_mean[1]
    blob = json.loads(res.to_json())
    assert blob["config_digest"] == res.config_digest


def test_scan_result_validation():
    with pytest.raises(InvalidArgument):
        mc.ScanResult([1], [1, 2], [0], [1], "x")
    with pytest.raises(InvalidArgument):
        mc.ScanResult([1], [1], [-1], [1], "x")


def test_stderr_helper():
    vals = [0.1, 0.2, 0.4, 0.7]
    want = np.std(vals, ddof=1) / math.sqrt(len(vals))
    assert mc._stderr(vals) == pytest.approx(want)
    assert mc._stderr([0.3]) == 0.0
