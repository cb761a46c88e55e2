import json
import math

import pytest

import qgsw


def test_bessel_values():
    assert qgsw.bessel_i(2, 1.0) == pytest.approx(0.13574766976703828, rel=1e-14)
    assert qgsw.bessel_k(1, 2.0) == pytest.approx(0.13986588181652243, rel=1e-14)
    assert qgsw.product_ik(7, 1.3) == pytest.approx(qgsw.product_ik_integral(7, 1.3), rel=1e-10)


def test_domain_errors_map_to_value_error():
    with pytest.raises(ValueError):
        qgsw.bessel_k(0, -1.0)
    with pytest.raises(ValueError):
        qgsw.eigenvalues(3, 1.0, 1.0)


def test_spectrum_at_reference_point():
    assert qgsw.find_threshold(1.0, 0.5) == (3, 3)
    assert qgsw.eigenvalues(2, 1.0, 0.5) is None
    e = qgsw.eigenvalues(5, 1.0, 0.5)
    assert e["plus"] == pytest.approx(0.16452315601374729, rel=1e-13)
    assert e["minus"] < e["plus"]
    lo, hi = qgsw.omega_limits(1.0, 0.5)
    assert lo < e["minus"] < e["plus"] < hi
    m = qgsw.spectral_matrix(5, 1.0, 0.5, e["plus"])
    assert abs(m[0][0] * m[1][1] - m[0][1] * m[1][0]) < 1e-14


def test_trivial_solution_and_linearization():
    g1, g2 = qgsw.g_functional(1.0, 0.5, 0.3)
    assert max(map(abs, g1 + g2)) < 1e-11
    r = qgsw.linearization_check(4, 1.0, 0.5, 0.2)
    assert r["max_deviation"] < 1e-6


def test_short_branch():
    t = qgsw.trace_branch(1.0, 0.5, 5, "plus", s_max=1e-3, steps=2)
    assert t["complete"]
    assert len(t["points"]) == 2
    assert all(p["residual"] <= 1e-10 for p in t["points"])
    assert abs(t["omega_extrapolated"] - t["omega_bifurcation"]) < 1e-3


def test_run_matches_cli_layout():
    code, files, _ = qgsw.run(json.dumps({"command": "limits"}))
    assert code == 0
    assert set(files) == {"limits.csv", "summary.json"}
    summary = json.loads(files["summary.json"])
    assert summary["command"] == "limits"
    code, files, message = qgsw.run(json.dumps({"command": "spectrum", "b": 1.0}))
    assert code == 1
    assert not files
    assert "b" in message
    assert math.isfinite(qgsw.euler_eigenvalues(5, 0.5)[1])
