import math

import pytest

import sparsedae


def test_version():
    assert sparsedae.__version__ == "0.1.0"


def test_ex1_session():
    traj = sparsedae.solve("ex1", tf=1.0, atol=1e-4, hinit=1e-5, hmax=0.05, method="imptrap")
    assert traj.ok()
    assert traj.accepted == 28
    assert traj.names == ["y", "z"]
    y, z = traj.final_state
    assert y == pytest.approx(math.sin(1.0), abs=1e-4)
    assert z == pytest.approx(math.cos(1.0), abs=1e-4)


def test_expression_diff():
    e = sparsedae.parse_expression("u1*u1 + exp(u2)")
    d = e.diff(0)
    assert d.eval([3.0, 0.0]) == pytest.approx(6.0)
    assert e.diff(1).eval([0.0, 0.0]) == pytest.approx(1.0)
    assert sorted(e.free_unknowns()) == [0, 1]


def test_problem_sizes():
    assert sparsedae.make_problem("ex1").size == 2
    ex4 = sparsedae.make_problem("ex4", N=8)
    assert ex4.size > 0 and ex4.ode_count <= ex4.size
    assert sparsedae.make_problem("decay").exact(0.0) == [1.0]


def test_sparsity_rows():
    rows = sparsedae.sparsity(sparsedae.make_problem("ex1"), sparsedae.Method.RAD)
    assert len(rows) == 4


def test_errors_map_to_exceptions():
    with pytest.raises(sparsedae.ParseError):
        sparsedae.parse_expression("u1 +")
    with pytest.raises(sparsedae.Error):
        sparsedae.make_problem("nope")
    with pytest.raises(sparsedae.InvalidOptions):
        sparsedae.solve("ex1", tf=-1.0)
    with pytest.raises(TypeError):
        sparsedae.solve("ex1", bogus=1)


def test_problem_text():
    text = "[params]\nk = 2\n[odes]\ny' = -k*y\n[init]\ny = 1\n"
    p = sparsedae.parse_problem(text)
    traj = sparsedae.solve(p, tf=1.0, atol=1e-8, hinit=1e-6, hmax=0.05, method="rad")
    assert traj.final_state[0] == pytest.approx(math.exp(-2.0), rel=1e-5)


def test_order_study_slopes():
    p = sparsedae.make_problem("decay")
    opt = sparsedae.SolverOptions()
    opt.tf = 1.0
    opt.ctol = 1e-14
    opt.iter = 20
    for method in (sparsedae.Method.EB, sparsedae.Method.CN):
        study = sparsedae.order_study(p, method, [0.05, 0.025, 0.0125], opt)
        assert study.raw_slope == pytest.approx(sparsedae.method_order(method), abs=0.2)
        assert study.extrapolated_slope == pytest.approx(sparsedae.extrapolated_order(method), abs=0.3)
