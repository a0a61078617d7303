"""Smoke test for the fastdcov extension module.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o target/wheels
    pip install target/wheels/fastdcov-*.whl
"""

import json
import math
import random

import fastdcov


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    v = [0.0, 1.0, 2.0, 3.0]
    s = fastdcov.PairedSample(v, v)
    assert len(s) == 4
    assert close(fastdcov.unbiased_dcov2(s).value, 2.0 / 3.0, 1e-12)
    assert close(fastdcov.bias_corrected_dcor2(s).value, 1.0, 1e-12)

    rng = random.Random(5)
    x = [rng.gauss(0, 1) for _ in range(300)]
    y = [xi * xi + rng.gauss(0, 0.5) for xi in x]
    s = fastdcov.PairedSample(x, y)
    for name in ("unbiased_dcov2", "bias_corrected_dcor2", "vstat_dcov2", "vstat_dcor2", "sirs"):
        fn = getattr(fastdcov, name)
        fast, direct = fn(s, "fast").value, fn(s, "direct").value
        assert close(fast, direct), (name, fast, direct)

    n = len(s)
    jack = sum(fastdcov.unbiased_dcov2_leave_one_out(s, k) for k in range(n))
    assert close(jack, n * fastdcov.unbiased_dcov2(s).value, 1e-8)

    assert close(fastdcov.sirs(fastdcov.PairedSample([1.0] * 3, [1.0, 2.0, 3.0])).value, 5.0 / 6.0)

    try:
        fastdcov.unbiased_dcov2(fastdcov.PairedSample([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]), "direct")
    except ValueError as e:
        assert "sample too small" in str(e)
    else:
        raise AssertionError("expected ValueError")

    try:
        fastdcov.PairedSample([1.0, math.nan], [1.0, 2.0])
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError for NaN")

    rows = fastdcov.showcase(n=2000, seed=7)
    assert len(rows) == 9
    case, label, pearson, dcor = rows[5]
    assert case == 6 and abs(pearson) < 0.1 and dcor > 0.2, rows[5]

    reports = json.loads(fastdcov.screen(model="1b", p=40, n=60, reps=5, seed=3))
    assert [r["method"] for r in reports] == ["SIS", "SIRS", "DC-SIS"]

    records = fastdcov.bench_run([64, 128, 256], ["fast"], reps=3, seed=1)
    slope = fastdcov.fit_scaling_slope([r[0] for r in records], [r[3] for r in records])
    assert math.isfinite(slope)

    print("fastdcov", fastdcov.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
