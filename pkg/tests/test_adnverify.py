import pytest

from macrolab import adnverify as adn
from macrolab.symkernel import (
    GaussRational, SymMatrix, adjugate, det, is_zero_mod_ideal, parse, rem_mod_tau,
)


@pytest.fixture(scope="module")
def report():
    return adn.run_pipeline()


def test_build_l_examples():
    l = adn.build_l()
    assert l[0, 0] == parse("-(x1**2 + x2**2 + x3**2) - x1**2")
    assert l == l.transpose()
    # xi = (1, 0, 0) gives -diag(2, 1, 1)
    point = {"x1": 1, "x2": 0, "x3": 0}
    vals = [[e.evaluate(point) for e in row] for row in l.rows]
    assert vals == [[GaussRational(-2), 0, 0], [0, GaussRational(-1), 0], [0, 0, GaussRational(-1)]]


def test_build_mplus():
    m = adn.build_Mplus()
    assert m == parse("t**3 - 3*I*l*t**2 - 3*l**2*t + I*l**3")
    assert rem_mod_tau(m, m).terms == {}


def test_build_boundary():
    B, fB = adn.build_boundary()
    assert B.shape == (4, 3) and fB.shape == (3, 3)
    assert is_zero_mod_ideal(fB[0, 0] - parse("t*(1 - n1**2) + L1*n1"))
    assert [str(e) for e in fB.rows[2]] == ["n1", "n2", "n3"]
    assert is_zero_mod_ideal(det(B.submatrix([0, 1, 2], [0, 1, 2])))


def test_bc_coeffs():
    Bt, Ct = adn.build_BC_coeffs()
    assert Bt == Bt.transpose() and Ct == Ct.transpose()
    # n = (0,0,1), Lambda = (1,0,0), l = 1: B_11 = tau + i
    point = {"t": 5, "l": 1, "L1": 1, "L2": 0, "L3": 0, "n1": 0, "n2": 0, "n3": 1}
    assert Bt[0, 0].evaluate(point) == GaussRational(5, 1)


def test_pipeline_passes(report):
    assert report.passed, report.failing_steps
    assert report.final_matches_closed_form
    assert str(report.final_determinant) == str(parse("384*l**8*n3*(t - I*l)**3"))


def test_pipeline_covers_every_display(report):
    names = [s.name for s in report.steps]
    for required in ["l", "D=det(l)", "L=-adj(l)", "M+", "B(Lambda+tau n)", "frakB",
                     "B_jk", "C_jk", "det:first", "det:1", "det:2", "det:3",
                     "det(M) = 384 l^8 n3 (tau - i l)^3"]:
        assert required in names
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            assert f"M{i}{j}:final" in names and f"M{i}{j}:first" in names
    for c in ("(1)x(4)", "(2)x(5)", "(3)x(6)"):
        assert f"cancel {c}" in names


def test_spot_value_oracle(report):
    # (2 - i)^3 = 2 - 11 i computed by hand; times 384
    step = next(s for s in report.steps if s.name == "det(M) spot value")
    assert step.passed and step.expected == str(GaussRational(768, -4224))


def test_m31_display(report):
    step = next(s for s in report.steps if s.name == "M31:final")
    assert step.passed


def test_errata_recorded(report):
    entries = {e["entry"]: e for e in report.errata}
    assert entries["M23 final simplified line"]["confirmed"]
    assert entries["adjoint matrix of l"]["confirmed"]


def test_true_adjugate_sign():
    # the genuine adjugate satisfies l adj(l) = det(l) I and differs from the
    # displayed matrix by an overall sign
    l = adn.build_l()
    L = adn.tmatrix(adn.tab.ADJOINT_L)
    assert adjugate(l) == -L
    assert l @ adjugate(l) == SymMatrix.identity(3).scale(det(l))


def test_report_deterministic(report):
    assert adn.run_pipeline().digest() == report.digest()


@pytest.mark.parametrize("mutation", adn.default_mutations()[:3])
def test_mutation_detected(mutation):
    rep = adn.run_pipeline([mutation])
    assert not rep.passed
    assert rep.first_failure is not None


def test_parse_mutation():
    assert adn.parse_mutation("M_final:2:0:1") == ("M_final", 2, 0, 1)
    with pytest.raises(ValueError):
        adn.parse_mutation("nope:0:0:0")
    with pytest.raises(ValueError):
        adn.parse_mutation("M_final:0:0")


def test_report_json_shape(report):
    d = report.to_dict()
    assert d["pass"] is True and d["first_failure"] is None
    assert all({"name", "pass", "expected", "computed"} <= set(s) for s in d["steps"])
    assert any("n3" in h for h in d["hypotheses"])
