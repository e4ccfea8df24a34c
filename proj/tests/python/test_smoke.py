import os

import pytest

import sensnet

FIXTURES = os.environ.get(
    "SENSNET_FIXTURES", os.path.join(os.path.dirname(__file__), "..", "..", "fixtures")
)


def fx(name):
    return os.path.join(FIXTURES, name)


def test_two_evidence_posterior():
    tree = sensnet.load_tree(fx("asia_tables.tree"))
    s = sensnet.QuerySession(tree)
    p = s.query("x_H", {"x_A": 1, "x_D": 1})
    assert p[1] == pytest.approx(0.68, abs=0.005)


def test_compile_matches_enumeration():
    net = sensnet.load_network(fx("asia.net"))
    tree = sensnet.compile(net, sensnet.load_plan(fx("asia.plan")))
    assert tree.variable_prior("x_A")[1] == pytest.approx(0.01, abs=1e-12)
    assert tree.pruned_states("X_3") == [2, 3]
    exact = sensnet.posterior(net, "x_H", {"x_A": 1, "x_D": 1})
    got = sensnet.QuerySession(tree).query("x_H", {"x_A": 1, "x_D": 1})
    assert abs(got[1] - exact[1]) < 1e-9
    assert sensnet.validate(net, tree)["passed"]


def test_algebra_round_trip():
    import numpy as np

    p = np.array([[0.8, 0.25], [0.2, 0.75]])
    s = sensnet.cpt_to_sensitivity(p)
    assert sensnet.numerical_rank(s) == 1
    q, r = sensnet.qr_factor(s)
    assert np.allclose(q.T @ r, s)
    assert sensnet.binary_sensitivity(p) == pytest.approx(0.55)


def test_truncation():
    assert sensnet.truncation_radius(0.5, 0.25, 0.999, 1) == 4


def test_cli_and_errors():
    code, out, _ = sensnet.run_cli(["report", fx("asia_tables.tree")])
    assert code == 0 and ".9900" in out
    code, _, _ = sensnet.run_cli(["query", fx("asia_tables.tree"), "--query", "nope"])
    assert code == 8
    s = sensnet.QuerySession(sensnet.load_tree(fx("asia_tables.tree")))
    with pytest.raises(sensnet.SensnetError) as info:
        s.query("nope")
    assert info.value.exit_code == 8
