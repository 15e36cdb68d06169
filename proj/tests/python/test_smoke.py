"""Smoke tests for the python bindings."""
import numpy as np
import pytest

import lpvcert


def case_study(gamma):
    a0 = np.array([
        [0.8, -0.25, 0.0, 1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.2, 0.03],
        [0.0, 0.0, 1.0, 0.0],
    ])
    b = np.array([[0.0], [0.0], [1.0], [0.0]])
    c = np.array([[0.8, -0.25, -0.2, -0.03]])
    ap = b @ c
    bmat = np.array([[1.0], [0.0], [1.0], [0.0]])
    cmat = np.array([[1.0, 0.0, 0.0, 0.0]])
    return lpvcert.PolytopicSystem.from_affine_scalar(a0, ap, gamma, bmat, cmat)


def test_svec_smat_roundtrip():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(4, 4))
    m = 0.5 * (m + m.T)
    v = lpvcert.svec(m)
    assert v.shape == (10,)
    back = lpvcert.smat(v)
    assert np.allclose(back, m, atol=1e-14)


def test_matrix_utilities():
    assert lpvcert.is_positive_definite(np.eye(2), 1e-9)
    assert not lpvcert.is_positive_definite(np.array([[1.0, 2.0], [2.0, 1.0]]), 1e-9)
    assert lpvcert.min_eigenvalue(np.diag([3.0, -2.0])) == pytest.approx(-2.0)
    assert lpvcert.spectral_radius(np.diag([0.5, -0.9])) == pytest.approx(0.9)


def test_system_and_simulation():
    sys = case_study(0.5)
    assert sys.nx == 4 and sys.nu == 1 and sys.ny == 1
    assert sys.num_vertices == 2
    assert sys.strictly_polytopic
    xi = sys.xi(np.array([0.0]))
    assert xi == pytest.approx([0.5, 0.5])

    traj = lpvcert.simulate(sys, np.array([1.0, 0.0, 0.0, 0.0]),
                            [np.array([0.0])] * 5)
    assert len(traj["states"]) == 6

    comp = lpvcert.PolytopicSystem.block_diag_compose([sys, sys, sys])
    assert comp.nx == 12 and comp.num_vertices == 8


def test_analyze_and_counts():
    sys = case_study(0.5)
    res = lpvcert.analyze(sys, "polyqs_l14")
    assert res["verdict"] == "feasible"
    assert res["margin"] > 0
    assert res["num_scalars"] == lpvcert.count_decision_vars("polyqs_l14", 2, 4, 1, 1) == 20

    res_bad = lpvcert.analyze(case_study(0.75), "polyqs_l14")
    assert res_bad["verdict"] == "infeasible"


def test_gain_and_verification():
    sys = case_study(1.0)
    res = lpvcert.analyze(sys, "synth_t43")
    assert res["verdict"] == "feasible"
    gain = lpvcert.gain_from_certificate("synth_t43", sys, res["matrices"])
    assert gain.recipe == "t43"
    k = gain.gain(np.array([0.0]))
    assert k.shape == (1, 4)

    sbars = [res["matrices"][f"Sbar_{i+1}"] for i in range(2)]
    rep = lpvcert.check_vertex_certificate(sys, sbars, False, "closed_loop", gain)
    assert rep["pass"]
    mc = lpvcert.monte_carlo_descent(sys, sbars, False, "closed_loop", gain,
                                     num_sequences=50, horizon=20, seed=42, a3=0.0)
    assert mc["pass"]
    assert mc["mc_worst_ratio"] <= 0.0


def test_ground_truth():
    gt = lpvcert.lti_ground_truth(np.array([[2.0]]), np.array([[1.0]]), np.array([[0.0]]))
    assert gt["stabilizable"] and not gt["detectable"]
