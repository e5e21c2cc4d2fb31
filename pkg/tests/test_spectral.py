import numpy as np
import pytest

from renyi_exhaust.interval import ONE, Interval, dot
from renyi_exhaust.matrix import build
from renyi_exhaust.spectral import (
    AlphaTooLarge,
    CertificationFailed,
    LambdaTooSmall,
    NoSignChange,
    OrthogonalStart,
    PivotNotUnit,
    certify,
    deflate,
    find_lambda,
    gershgorin,
    power_converge,
    renormalize_pair,
    similarity,
    solve_left,
    solve_right,
)


def _dominant_numpy(m):
    ev = np.linalg.eigvals(build(m).mid())
    return ev[np.argmax(np.abs(ev))]


@pytest.mark.parametrize("m", [4, 7, 20, 40])
def test_find_lambda_matches_numpy(m):
    lam = find_lambda(m)
    ref = _dominant_numpy(m)
    assert abs(ref.imag) < 1e-12
    assert lam.lo - 1e-12 <= ref.real <= lam.hi + 1e-12
    assert lam.hi - lam.lo <= 1e-10


def test_find_lambda_no_sign_change():
    with pytest.raises(NoSignChange):
        find_lambda(7, Interval(1.30, 1.40))


def test_lambda_too_small():
    with pytest.raises(LambdaTooSmall):
        solve_right(build(7), Interval(1.1, 1.1))


def test_right_and_left_vectors_are_eigenvectors():
    M = build(12)
    lam = find_lambda(12, tol=1e-13)
    A = M.mid()
    v = np.array([x.mid for x in solve_right(M, lam)])
    w = np.array([x.mid for x in solve_left(M, lam)])
    assert np.max(np.abs(A @ v - lam.mid * v)) < 1e-9
    assert np.max(np.abs(w @ A - lam.mid * w)) < 1e-9


def test_renormalize_exact_product():
    v = [ONE, Interval(0.5, 0.5)]
    w = [Interval(0.5, 0.5), ONE]
    w2, bound = renormalize_pair(v, w)
    assert bound.hi == 0.0 and w2 == w


def test_renormalize_small_defect():
    u = 2.0**-53
    # w . v = 1 + 7u exactly representable
    v = [ONE]
    w = [Interval(1 + 8 * u, 1 + 8 * u)]
    w2, bound = renormalize_pair(v, w)
    assert bound.hi <= 10 * u
    assert w2[0].contains(1.0)


def test_renormalize_large_defect():
    v = [ONE]
    w = [Interval(0.6, 1.4)]
    w2, bound = renormalize_pair(v, w)
    assert bound.contains(2 / 3) or abs(bound.mid - 2 / 3) < 1e-12
    with pytest.raises(AlphaTooLarge):
        renormalize_pair(v, [Interval(0.4, 1.6)])


def test_similarity_inverse():
    M = build(6)
    lam = Interval.point(find_lambda(6).mid)
    v = [Interval.point(x.mid) for x in solve_right(M, lam)]
    v[0] = ONE
    w = [Interval.point(x.mid) for x in solve_left(M, lam)]
    w_hat, _ = renormalize_pair(v, w)
    sim = similarity(v, w_hat)
    n = len(v)
    for i in range(n):
        for k in range(n):
            s = sum((sim.W[i][a] * sim.V[a][k] for a in range(n)), Interval(0.0, 0.0))
            assert s.contains(1.0 if i == k else 0.0)


def test_deflation_matches_triple_product():
    M = build(6)
    lam = Interval.point(find_lambda(6).mid)
    v = [Interval.point(x.mid) for x in solve_right(M, lam)]
    v[0] = ONE
    w = [Interval.point(x.mid) for x in solve_left(M, lam)]
    w_hat, _ = renormalize_pair(v, w)
    D = deflate(M, v, w_hat)
    sim = similarity(v, w_hat)
    W = np.array([[x.mid for x in r] for r in sim.W])
    V = np.array([[x.mid for x in r] for r in sim.V])
    ref = W @ M.mid() @ V
    Dm = np.array([[x.mid for x in r] for r in D])
    assert np.max(np.abs(Dm - ref)) < 1e-12
    # pivot column is lambda e_0 up to rounding
    assert D[0][0].lo - 1e-9 <= lam.mid <= D[0][0].hi + 1e-9
    assert max(D[i][0].mag for i in range(1, 7)) < 1e-9


def test_deflate_requires_unit_pivot():
    M = build(3)
    v = [Interval(0.9, 1.1)] + [Interval(0.0, 0.0)] * 3
    with pytest.raises(PivotNotUnit):
        deflate(M, v, v)


def test_gershgorin_diagonal():
    D = [[Interval.point(2.0), Interval.point(0.1)], [Interval.point(0.2), Interval.point(-1.0)]]
    rep = gershgorin(D)
    assert rep.radii[0] >= 0.2 and rep.radii[1] >= 0.1
    assert rep.isolated(0)


def test_stage_a_matches_reference_bounds(cert20):
    a = cert20.stages[0]
    assert a.h == 7
    assert a.norm_W <= 2.35
    assert a.norm_V <= 3.81
    assert a.discs.radii[0] < 0.00065
    assert a.outer_bound < 1.002
    assert a.disc0.subset(Interval(1.232891 - 0.0007, 1.232891 + 0.0007))


def test_certificate_contains_numpy_eigenvalues(cert64):
    for m in (64, 80, 120):
        ref = _dominant_numpy(m).real
        assert cert64.lam.lo - 1e-13 <= ref <= cert64.lam.hi + 1e-13


def test_larger_truncation_narrows_enclosure(cert64):
    c8 = certify(8)
    assert cert64.lam.hi - cert64.lam.lo < c8.lam.hi - c8.lam.lo
    assert cert64.lam.intersects(c8.lam)


def test_certification_failure_names_check():
    with pytest.raises(CertificationFailed) as exc:
        certify(20, h=2)
    assert "disc" in exc.value.check


def test_power_iteration_converges(cert20):
    M = build(20)
    u = np.zeros(21)
    u[1] = 1.0
    res = power_converge(u, 60, M, cert20)
    assert res.residual < 1e-4
    assert res.ratio.contains(cert20.lam)
    # unnormalised deviation is below the similarity bound
    A = M.mid()
    x = u.copy()
    for _ in range(60):
        x = A @ x / cert20.lam.mid
    w = np.array([t.mid for t in cert20.w])
    v = np.array([t.mid for t in cert20.v])
    dev = np.abs(x - (w @ u) / (w @ v) * v).sum()
    assert dev <= res.theorem_bound


def test_power_iteration_decay_rate(cert20):
    M = build(20)
    u = np.ones(21)
    # before the residual reaches the width of the eigenvector enclosure
    r5 = power_converge(u, 5, M, cert20).residual
    r15 = power_converge(u, 15, M, cert20).residual
    assert r15 < r5 * 0.82**10


def test_orthogonal_start(cert20):
    w = np.array([t.mid for t in cert20.w])
    u = np.zeros(21)
    u[0], u[1] = w[1], -w[0]
    with pytest.raises(OrthogonalStart):
        power_converge(u, 5, build(20), cert20)


def test_zeta_positive_and_consistent(cert20):
    assert cert20.zeta.lo > 0
    assert dot(cert20.w, cert20.v).intersects(cert20.zeta)
