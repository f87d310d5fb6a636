import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from paritybounds.bounds import bias_matrix, universal_bound
from paritybounds.coupling import (
    CouplingSpec,
    FixtureUnavailable,
    InfeasibleSpec,
    analytic_mixing_fixtures,
    branch_map,
    junction,
    mixing_function,
    pattern_probabilities,
    recursive_coupling,
    sample,
    sign_selector,
    support_curves,
    trivariate_copula,
    uniform_pairs,
    write_support_csv,
)
from paritybounds.marginal import (
    LinearDensity,
    Normal,
    ShiftedExponential,
    Tabulated,
    Uniform,
)
from paritybounds.parity import (
    SignPattern,
    WeightProfile,
    d3_weights,
    membership,
    recursive_split,
    weights_lp,
)
from paritybounds.verify import kendall_tau_is_one, mc_expected_product

LINEAR = tuple(LinearDensity(t) for t in (0.4, 0.2, -0.3))
MU75 = float(stats.norm.ppf(0.75))
MIXED4 = (Normal(0.3, 1.0), Normal(0.0, 2.0), LinearDensity(0.2), Uniform(-1.0, 1.0))
HETERO = tuple(ShiftedExponential(l, a) for l, a in zip((0.8, 1.0, 1.9), (0.15, 0.38, 0.20)))


def P(text):
    return SignPattern.parse(text)


# --------------------------------------------------------------- selector

def test_selector_examples():
    one = WeightProfile(None, "even", ((P("+++"), 1.0),))
    for v in (0.0, 0.3, 1.0):
        assert sign_selector(one, 0.5, v) == P("+++")
    flat = d3_weights([0.5, 0.5, 0.5], "even")
    assert sign_selector(flat, 0.5, 0.6) == P("-+-")
    assert sign_selector(flat, 0.5, 0.0) == P("+++")
    w = d3_weights([0.7, 0.6, 0.35], "even")
    assert sign_selector(w, 1.0, 0.7) == P("+--")
    assert sign_selector(w, 1.0, 0.32) == P("+++")
    assert sign_selector(w, 1.0, 0.99) == P("--+")
    assert sign_selector(lambda u: w, 1.0, 0.7) == P("+--")


def test_selector_frequencies():
    w = d3_weights([0.7, 0.6, 0.35], "even")
    v = np.linspace(0, 1, 40001)[1:]
    got = [sign_selector(w, 1.0, x) for x in v[::40]]
    for pat, wt in w.entries:
        assert got.count(pat) / len(got) == pytest.approx(wt, abs=2e-3)


# --------------------------------------------------------------- sampling

def test_uniform_pairs_stream():
    u, v = uniform_pairs(7, 5)
    u2, v2 = uniform_pairs(7, 9)
    assert np.array_equal(u, u2[:5]) and np.array_equal(v, v2[:5])
    assert np.all((u > 0) & (u < 1) & (v > 0) & (v < 1))


def test_empty_batch():
    b = sample(CouplingSpec(LINEAR), 0)
    assert b.n == 0 and b.x.shape == (0, 3)


def test_linear_mean():
    b = sample(CouplingSpec(LINEAR, "max", seed=1), 10**6)
    est = mc_expected_product(b)
    assert est.within(0.25, 3.0)


def test_normal_min_products():
    b = sample(CouplingSpec((Normal(0.0, 1.0),) * 3, "min", seed=3), 20000)
    assert np.all(b.products() <= 0)
    b = sample(CouplingSpec((Normal(0.0, 1.0),) * 3, "max", seed=3), 20000)
    assert np.all(b.products() >= 0)


@pytest.mark.parametrize("strategy", ["lp_weights", "closed_form_d3"])
def test_magnitudes_exact(strategy):
    ms = (Normal(0.0, 1.0), LinearDensity(0.3), Uniform(-1.0, 1.0))
    b = sample(CouplingSpec(ms, "max", strategy, seed=4), 5000)
    for i, m in enumerate(ms):
        assert np.array_equal(np.abs(b.x[:, i]), m.abs_quantile(b.level))
    assert kendall_tau_is_one(np.abs(b.x))


def test_lp_strategy_level_is_u():
    b = sample(CouplingSpec(LINEAR, "max", "lp_weights", seed=2), 1000)
    assert np.array_equal(b.level, b.u)


def test_deterministic(monkeypatch):
    spec = CouplingSpec((Normal(0.0, 1.0),) * 4, "max", seed=11)
    a = sample(spec, 150000)
    monkeypatch.setenv("PARITY_BOUNDS_THREADS", "2")
    b = sample(spec, 150000)
    monkeypatch.setenv("PARITY_BOUNDS_THREADS", "1")
    c = sample(spec, 150000)
    for other in (b, c):
        assert np.array_equal(a.x, other.x) and np.array_equal(a.signs, other.signs)
    assert not np.array_equal(a.x, sample(CouplingSpec(spec.marginals, seed=12), 150000).x)


def test_parity_of_rows():
    for target, prod in (("max", 1), ("min", -1)):
        b = sample(CouplingSpec(LINEAR, target, seed=5), 20000)
        assert np.all(np.prod(b.signs, axis=1) == prod)


def test_pattern_ids_and_strings():
    b = sample(CouplingSpec(LINEAR, "max", seed=5), 200)
    pats = b.patterns()
    order = ["+++", "+--", "-+-", "--+"]
    assert [order.index(p) for p in pats] == list(b.pattern_ids())


def test_csv(tmp_path):
    b = sample(CouplingSpec(LINEAR, "max", seed=5), 10)
    path = tmp_path / "s.csv"
    b.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "u,v,pattern,x1,x2,x3" and len(lines) == 11
    row = lines[1].split(",")
    assert float(row[0]) == b.u[0] and float(row[3]) == b.x[0, 0]


def test_infeasible_refused():
    ms = (ShiftedExponential(1.0, 0.3),) * 3
    with pytest.raises(InfeasibleSpec) as exc:
        sample(CouplingSpec(ms, "min"), 10)
    assert not exc.value.report.sharp and exc.value.report.parity == "odd"


def test_spec_validation():
    with pytest.raises(ValueError):
        CouplingSpec(LINEAR[:1])
    with pytest.raises(ValueError):
        CouplingSpec(LINEAR, "mean")
    with pytest.raises(ValueError):
        CouplingSpec(LINEAR, strategy="recursive_pivot")
    with pytest.raises(ValueError):
        CouplingSpec(LINEAR + LINEAR[:1], strategy="closed_form_d3")
    with pytest.raises(ValueError):
        CouplingSpec(LINEAR, pivot=3)
    with pytest.raises(ValueError):
        CouplingSpec(LINEAR, seed=-1)
    with pytest.raises(ValueError):
        sample(CouplingSpec(LINEAR), -1)
    assert CouplingSpec(LINEAR).strategy == "closed_form_d3"
    assert CouplingSpec(LINEAR * 2).strategy == "recursive_pivot"
    assert CouplingSpec(LINEAR[:2]).strategy == "lp_weights"


def test_bivariate():
    ms = (Normal(0.3, 1.0), Normal(0.6, 2.0))
    b = sample(CouplingSpec(ms, "max", seed=9), 200000)
    assert mc_expected_product(b).within(universal_bound(ms).value, 4.0)
    for i, m in enumerate(ms):
        assert stats.kstest(b.x[:, i], m.cdf).statistic < 1.63 / np.sqrt(b.n)


# -------------------------------------------------------------- trivariate

def test_normal_zero_mixing():
    u = np.linspace(1e-6, 1 - 1e-6, 2001)
    ms = (Normal(0.0, 1.0),) * 3
    for target in ("max", "min"):
        assert np.max(np.abs(mixing_function(ms, target, u) - 0.5)) < 1e-10
    v = np.random.default_rng(0).uniform(size=u.size)
    _, U2, U3 = trivariate_copula(ms, "max", u, v)
    for U in (U2, U3):
        assert np.all(np.isclose(U, u, atol=1e-12) | np.isclose(U, 1 - u, atol=1e-12))


def test_shifted_exp_examples():
    ms = (ShiftedExponential(1.0, 0.3),) * 3
    u = np.linspace(1 - np.exp(-0.6) + 1e-6, 1 - 1e-9, 500)
    v = np.random.default_rng(1).uniform(size=u.size)
    _, U2, U3 = trivariate_copula(ms, "max", u, v)
    assert np.allclose(U2, u, atol=1e-12) and np.allclose(U3, u, atol=1e-12)
    low = np.linspace(1e-4, 1 - np.exp(-0.3) - 1e-6, 300)
    assert np.allclose(mixing_function(ms, "max", low), 0.5, atol=1e-12)


def test_branch_map():
    m = LinearDensity(0.4)
    w = np.linspace(0.01, 0.99, 50)
    assert np.allclose(m.quantile(branch_map(m, 1, w)), w, atol=1e-12)
    assert np.allclose(m.quantile(branch_map(m, -1, w)), -w, atol=1e-12)


@pytest.mark.parametrize("target", ["max", "min"])
def test_trivariate_reproduces_d3_weights(target):
    """Integrating the conditional law over each magnitude level recovers d3_weights."""
    ms = LINEAR
    parity = "even" if target == "max" else "odd"
    w = 0.37
    P_ = bias_matrix(ms, np.array([w]))[0]
    expected = d3_weights(P_, parity).dense()
    # the two copula coordinates sharing magnitude w
    m1 = ms[0]
    ups = [float(m1.cdf(m1.abs_quantile(w))), float(m1.cdf(-m1.abs_quantile(w)))]
    p1 = P_[0]
    law = p1 * pattern_probabilities(ms, target, ups[0])[0] \
        + (1 - p1) * pattern_probabilities(ms, target, ups[1])[0]
    assert np.allclose(law, expected, atol=1e-12)


@pytest.mark.parametrize("ms,target", [(LINEAR, "max"), (LINEAR, "min"), (HETERO, "max"),
                                       ((Normal(MU75, 1.0),) * 3, "max"),
                                       ((Normal(-MU75, 1.0),) * 3, "min")])
def test_copula_coordinates_uniform(ms, target):
    u, v = uniform_pairs(21, 100000)
    out = trivariate_copula(ms, target, u, v)
    for U in out:
        assert stats.kstest(U, "uniform").statistic < 1.63 / np.sqrt(u.size)
    xs = np.stack([m.quantile(np.clip(U, 1e-16, 1 - 1e-16)) for m, U in zip(ms, out)], axis=1)
    assert np.all(np.sign(np.prod(xs, axis=1)) * (1 if target == "max" else -1) >= 0)


def test_null_branch_never_crashes():
    ms = (Uniform(0.1, 1.0), LinearDensity(0.2), LinearDensity(-0.2))
    u = np.linspace(0.001, 0.999, 200)
    s = mixing_function(ms, "max", u)
    assert np.all(np.isfinite(s)) and np.all((s >= 0) & (s <= 1))


# ---------------------------------------------------------------- fixtures

@pytest.mark.parametrize("m,target", [(ShiftedExponential(1.0, 0.3), "max"),
                                      (ShiftedExponential(2.0, 0.15), "max"),
                                      (ShiftedExponential(1.0, 0.3), "min"),
                                      (Normal(MU75, 1.0), "max"),
                                      (Normal(0.3, 2.0), "max"),
                                      (Normal(-MU75, 1.0), "min"),
                                      (Normal(0.0, 1.0), "max"),
                                      (Normal(0.0, 1.0), "min")])
def test_fixture_agreement(m, target):
    fx = analytic_mixing_fixtures(m, target)
    lo, hi = fx.domain
    u = np.linspace(lo, hi, 4003)[1:-1]
    got = pattern_probabilities((m,) * 3, target, u)
    assert np.max(np.abs(got - fx.pattern_probabilities(u))) < 1e-9


def test_fixture_involution():
    for m in (ShiftedExponential(1.0, 0.3), Normal(MU75, 1.0), Normal(-0.4, 1.5)):
        fx = analytic_mixing_fixtures(m, "max" if getattr(m, "mu", 1) >= 0 else "min")
        u = np.linspace(0.01, fx.zero_level if isinstance(m, ShiftedExponential) else 0.99, 300)
        assert np.allclose(m.quantile(fx.tau(u)), -m.quantile(u), atol=1e-8)
        assert np.allclose(fx.tau(u), m.sign_flip(u), atol=1e-9)


def test_fixture_examples():
    fx = analytic_mixing_fixtures(ShiftedExponential(1.0, 0.3), "max")
    u = np.linspace(1 - np.exp(-0.6) + 1e-9, 1 - 1e-9, 100)
    assert np.all(fx.s(u) == 1.0)
    assert np.all(analytic_mixing_fixtures(Normal(0.0, 1.0)).s(np.linspace(0.01, 0.99, 99)) == 0.5)
    assert analytic_mixing_fixtures(Normal(1.0, 1.0)).s(np.array([1 - 1e-12]))[0] > 0.999


def test_fixture_unavailable():
    with pytest.raises(FixtureUnavailable):
        analytic_mixing_fixtures(LinearDensity(0.2))
    with pytest.raises(FixtureUnavailable):
        analytic_mixing_fixtures(Normal(-0.5, 1.0), "max")
    with pytest.raises(FixtureUnavailable):
        analytic_mixing_fixtures(Normal(0.5, 1.0), "min")


# ----------------------------------------------------------------- support

def test_support_junction():
    curves = support_curves(LINEAR, "max", 256)
    assert np.allclose(junction(LINEAR), (0.4, 0.45, 0.575), atol=1e-15)
    assert len(curves) == 4
    for c in curves:
        hit = np.flatnonzero(c.u_grid == 0.4)
        assert hit.size == 1
        assert np.allclose(c.points[hit[0]], [0.4, 0.45, 0.575], atol=1e-12)
        assert np.all((c.points >= 0) & (c.points <= 1))
    assert np.allclose(junction((Normal(MU75, 1.0),) * 3), 0.25, atol=1e-15)


def test_support_hetero_diagonal():
    curves = {str(c.pattern): c for c in support_curves(HETERO, "max", 2048)}
    c = curves["+++"]
    f3a3 = HETERO[2].cdf(HETERO[2].a)
    sel = c.u_grid > f3a3 + 1e-9
    assert sel.any()
    assert np.allclose(c.points[sel, 1], c.points[sel, 0], atol=1e-9)
    assert np.allclose(c.points[sel, 2], c.points[sel, 0], atol=1e-9)


def test_support_csv(tmp_path):
    path = tmp_path / "c.csv"
    write_support_csv(support_curves(LINEAR, "min", 32), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "pattern,u,U1,U2,U3"
    assert {l.split(",")[0] for l in lines[1:]} == {"++-", "+-+", "-++", "---"}


def test_support_requires_d3():
    with pytest.raises(ValueError):
        support_curves(LINEAR * 2, "max")


# --------------------------------------------------------------- recursive

def test_recursive_normal_d4():
    ms = (Normal(0.0, 1.0),) * 4
    b = sample(CouplingSpec(ms, "max", seed=2), 50000)
    assert np.all(np.prod(b.signs, axis=1) == 1)
    assert kendall_tau_is_one(np.abs(b.x))


def test_recursive_half_bias_min():
    ms = (Uniform(-1.0, 1.0),) * 4
    b = sample(CouplingSpec(ms, "min", seed=2), 50000)
    assert np.all(b.products() <= 0)
    assert mc_expected_product(b).within(-0.2, 4.0)


def test_recursive_positive_pivot():
    # the pivot is nonnegative, so only the positive branch exists
    ms = (Uniform(0.0, 1.0), Uniform(-1.0, 1.0), Uniform(-1.0, 1.0), Uniform(-1.0, 1.0))
    b = sample(CouplingSpec(ms, "max", seed=8), 40000)
    assert np.all(b.signs[:, 0] == 1)
    rest = np.prod(b.signs[:, 1:], axis=1)
    assert np.all(rest == 1)
    assert mc_expected_product(b).within(0.2, 4.0)


@pytest.mark.parametrize("pivot", [0, 1, 3])
def test_recursive_pivots(pivot):
    ms = MIXED4
    spec = CouplingSpec(ms, "max", seed=10, pivot=pivot)
    b = sample(spec, 200000)
    assert np.array_equal(b.level, ms[pivot].abs_cdf(np.abs(ms[pivot].quantile(b.u))).clip(
        np.nextafter(0, 1), np.nextafter(1, 0)))
    assert mc_expected_product(b).within(universal_bound(ms).value, 4.0)
    for i, m in enumerate(ms):
        assert stats.kstest(b.x[:, i], m.cdf).statistic < 1.63 / np.sqrt(b.n)


def test_recursive_coupling_coordinates():
    ms = (Normal(0.0, 1.0),) * 4
    u, v = uniform_pairs(3, 50000)
    out = recursive_coupling(ms, "max", 0, u, v)
    assert np.array_equal(out[0], u)
    for U in out[1:]:
        assert stats.kstest(U, "uniform").statistic < 1.63 / np.sqrt(u.size)
    with pytest.raises(ValueError):
        recursive_coupling(LINEAR, "max", 0, u, v)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.integers(0, 3))
def test_recursive_split_memberships(level, pivot):
    ms = MIXED4
    p = bias_matrix(ms, np.array([level]))[0]
    sp = recursive_split(weights_lp(p, "even"), pivot)
    assert membership(sp.q_plus, "even").inside
    assert membership(sp.q_minus, "odd").inside
    mix = sp.p_pivot * sp.q_plus + (1 - sp.p_pivot) * sp.q_minus
    assert np.max(np.abs(mix - np.delete(p, pivot))) < 1e-12


def test_tabulated_margin():
    t = Tabulated((-1.0, 0.0, 2.0), (0.2, 1.0, 0.1))
    ms = (t, LinearDensity(0.1), Normal(0.2, 1.0))
    b = sample(CouplingSpec(ms, "max", seed=4), 100000, check=False)
    assert stats.kstest(b.x[:, 0], t.cdf).statistic < 1.63 / np.sqrt(b.n)
