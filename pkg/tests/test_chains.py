import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import graphs
from spectral_gap_lab import chains
from spectral_gap_lab.errors import (
    BadColorCounts,
    BadParticleCount,
    DimensionMismatch,
    IncompatibleKinds,
    OddVertexCount,
    SizeLimit,
    TooSmall,
)
from spectral_gap_lab.graph import WeightedGraph, random_graph
from spectral_gap_lab.spectra import multiset_subset, spectral_gap


def _is_generator(Q):
    off = Q - np.diag(np.diag(Q))
    return (np.array_equal(Q, Q.T) and np.all(off >= 0)
            and np.max(np.abs(Q.sum(axis=1))) <= 1e-12 * max(1.0, np.abs(Q).max()))


def test_rw_two_state():
    q = chains.build_rw(WeightedGraph.path([0.4])).Q
    assert np.array_equal(q, [[-0.4, 0.4], [0.4, -0.4]])


def test_rw_values(k4):
    assert np.allclose(chains.build_rw(k4).spectrum().values, [0, 4, 4, 4], atol=1e-12)
    path = WeightedGraph.path([1.0, 1.0])
    assert np.allclose(chains.build_rw(path).spectrum().values, [0, 1, 3], atol=1e-12)


def test_ip_two_vertices_is_rw():
    g = WeightedGraph.path([1.7])
    assert np.array_equal(chains.build_ip(g).Q, chains.build_rw(g).Q)


def test_ip_triangle_gap():
    assert spectral_gap(chains.build_ip(WeightedGraph.complete(3))) == pytest.approx(3.0, abs=1e-12)


@given(graphs(min_n=2, max_n=5))
def test_ip_matches_bruteforce(g):
    states, Q = oracles.ip_generator(g.weights)
    gen = chains.build_ip(g)
    assert list(gen.space.states) == states
    assert np.allclose(gen.Q, Q, rtol=0, atol=1e-14)
    # the diagonal is by construction the negated off-diagonal row sum
    off = gen.Q - np.diag(np.diag(gen.Q))
    assert np.array_equal(np.diag(gen.Q), -off.sum(axis=1))
    assert np.max(np.abs(gen.Q.sum(axis=1))) <= 1e-15 * max(1.0, np.abs(gen.Q).max())


@given(graphs(min_n=2, max_n=6), st.data())
def test_ep_matches_bruteforce(g, data):
    k = data.draw(st.integers(1, g.n - 1))
    states, Q = oracles.ep_generator(g.weights, k)
    gen = chains.build_ep(g, k)
    as_bits = [tuple(int(x in s) for x in range(g.n)) for s in gen.space.states]
    perm = [states.index(b) for b in as_bits]
    assert np.allclose(gen.Q, Q[np.ix_(perm, perm)], atol=1e-14)


def test_ep_one_particle_is_rw(rand5):
    assert np.array_equal(chains.build_ep(rand5, 1).Q, chains.build_rw(rand5).Q)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_ep_complementation_isospectral(n):
    g = random_graph(n, 0.7, n)
    for k in range(1, n):
        a = chains.build_ep(g, k).spectrum().values
        b = chains.build_ep(g, n - k).spectrum().values
        assert np.allclose(a, b, atol=1e-10)


def test_k4_named_gaps(k4):
    assert chains.build_ep(k4, 2).gap() == pytest.approx(4, abs=1e-10)
    assert chains.build_cep(k4, (2, 1, 1)).gap() == pytest.approx(4, abs=1e-10)
    assert chains.build_cycle(k4).gap() == pytest.approx(6, abs=1e-10)
    mp = chains.build_matching(k4)
    assert np.array_equal(-mp.Q, [[4, -2, -2], [-2, 4, -2], [-2, -2, 4]])
    assert np.allclose(mp.spectrum().values, [0, 6, 6], atol=1e-12)


def test_cep_special_cases(rand5):
    ip = chains.build_ip(rand5)
    cep = chains.build_cep(rand5, (1, 1, 1, 1, 1))
    assert np.array_equal(cep.Q, ip.Q)
    ep = chains.build_ep(rand5, 2)
    cep2 = chains.build_cep(rand5, (2, 3))
    assert np.allclose(cep2.spectrum().values, ep.spectrum().values, atol=1e-10)


@pytest.mark.parametrize("kind, n, params", [
    (chains.RW, 5, ()), (chains.IP, 5, ()), (chains.EP, 6, (3,)), (chains.CEP, 6, (3, 2, 1)),
    (chains.CP, 6, ()), (chains.CP, 4, ()), (chains.MP, 4, ()), (chains.MP, 6, ())])
def test_state_counts(kind, n, params):
    space = chains.state_space(kind, n, params)
    assert len(space) == chains.expected_size(kind, n, params)
    assert len(set(space.states)) == len(space)


def test_state_orders():
    ep = chains.state_space(chains.EP, 4, (2,)).states
    assert ep == tuple(sorted(ep, key=lambda c: c[::-1]))
    assert ep[:3] == ((0, 1), (0, 2), (1, 2))
    cep = chains.state_space(chains.CEP, 4, (2, 1, 1)).states
    assert list(cep) == sorted(cep)
    mp = chains.state_space(chains.MP, 4).states
    assert mp == (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))
    assert len(chains.state_space(chains.CP, 4)) == 3


@pytest.mark.parametrize("call, err", [
    (lambda: chains.state_space(chains.EP, 4, (0,)), BadParticleCount),
    (lambda: chains.state_space(chains.EP, 4, (4,)), BadParticleCount),
    (lambda: chains.state_space(chains.EP, 4, ()), BadParticleCount),
    (lambda: chains.state_space(chains.CEP, 4, (2, 1)), BadColorCounts),
    (lambda: chains.state_space(chains.CEP, 4, (4,)), BadColorCounts),
    (lambda: chains.state_space(chains.CP, 3), TooSmall),
    (lambda: chains.state_space(chains.MP, 5), OddVertexCount),
    (lambda: chains.state_space(chains.IP, 7), SizeLimit),
    (lambda: chains.state_space(chains.IP, 8, max_n=8), SizeLimit),
])
def test_state_space_errors(call, err):
    with pytest.raises(err):
        call()


def test_ip_seven_behind_override():
    space = chains.state_space(chains.IP, 7, max_n=7)
    assert len(space) == 5040


@settings(max_examples=10)
@given(graphs(min_n=4, max_n=6))
def test_every_generator_well_formed(g):
    builds = [chains.build_rw(g), chains.build_ip(g), chains.build_ep(g, 2), chains.build_cycle(g)]
    if g.n % 2 == 0:
        builds.append(chains.build_matching(g))
    for gen in builds:
        assert _is_generator(gen.Q)
        gen.gap()  # raises unless the zero eigenvalue is simple


@pytest.mark.parametrize("target, params, fiber", [
    (chains.RW, (), 2), (chains.EP, (1,), 2)])
def test_fibers_n3(target, params, fiber):
    src = chains.state_space(chains.IP, 3)
    p = chains.contraction(src, chains.state_space(target, 3, params))
    assert p.lift.shape == (6, 3)
    assert np.all(p.fiber_sizes() == fiber)


def test_fibers_n4():
    src = chains.state_space(chains.IP, 4)
    assert np.all(chains.contraction(src, chains.state_space(chains.MP, 4)).fiber_sizes() == 8)
    assert np.all(chains.contraction(src, chains.state_space(chains.EP, 4, (2,))).fiber_sizes() == 4)
    assert np.all(chains.contraction(src, chains.state_space(chains.CP, 4)).fiber_sizes() == 8)


def _intertwining_pairs(n):
    out = [(chains.IP, (), chains.RW, ()), (chains.IP, (), chains.IP, ())]
    for k in range(1, n):
        out.append((chains.IP, (), chains.EP, (k,)))
        out.append((chains.CEP, (k, n - k), chains.EP, (k,)))
    out.append((chains.IP, (), chains.CEP, (1,) * (n - 2) + (2,)))
    if n >= 4:
        out.append((chains.IP, (), chains.CP, ()))
    if n % 2 == 0 and n >= 4:
        out.append((chains.IP, (), chains.MP, ()))
    return out


@pytest.mark.parametrize("n", [3, 4, 5])
def test_intertwining_exact_integer_weights(n):
    rng = np.random.default_rng(n)
    w = np.triu(rng.integers(1, 5, size=(n, n)).astype(float), 1)
    g = WeightedGraph(w + w.T)
    for sk, sp, tk, tp in _intertwining_pairs(n):
        p = chains.contraction(chains.state_space(sk, n, sp), chains.state_space(tk, n, tp))
        assert chains.verify_intertwining(chains.build(g, sk, sp), chains.build(g, tk, tp), p) == 0.0


@given(graphs(min_n=3, max_n=5))
def test_intertwining_float_weights(g):
    for sk, sp, tk, tp in _intertwining_pairs(g.n):
        p = chains.contraction(chains.state_space(sk, g.n, sp), chains.state_space(tk, g.n, tp))
        q1, q2 = chains.build(g, sk, sp), chains.build(g, tk, tp)
        assert chains.verify_intertwining(q1, q2, p) <= 1e-12 * max(1.0, np.abs(q1.Q).max())


def test_contraction_errors():
    src = chains.state_space(chains.EP, 4, (2,))
    with pytest.raises(IncompatibleKinds):
        chains.contraction(src, chains.state_space(chains.IP, 4))
    with pytest.raises(IncompatibleKinds):
        chains.contraction(chains.state_space(chains.IP, 4), chains.state_space(chains.RW, 3))
    g = WeightedGraph.complete(4)
    p = chains.contraction(chains.state_space(chains.IP, 4), chains.state_space(chains.RW, 4))
    with pytest.raises(DimensionMismatch):
        chains.verify_intertwining(chains.build_rw(g), chains.build_rw(g), p)


@settings(max_examples=15)
@given(graphs(min_n=2, max_n=5))
def test_spectral_inclusions(g):
    n = g.n
    ip = chains.build_ip(g).spectrum()
    rw = chains.build_rw(g).spectrum()
    tol = 1e-7 * max(1.0, ip.radius)
    for k in range(1, n):
        ep = chains.build_ep(g, k).spectrum()
        assert multiset_subset(rw, ep, tol)[0]
        assert multiset_subset(ep, ip, tol)[0]
        if n >= 3:
            cep = chains.build_cep(g, (k, n - k)).spectrum()
            assert multiset_subset(ep, cep, tol)[0]
    if n >= 4:
        assert multiset_subset(chains.build_cycle(g).spectrum(), ip, tol)[0]
    if n == 4:
        assert multiset_subset(chains.build_matching(g).spectrum(), ip, tol)[0]


def test_ep_lifting(rand5):
    lam, vecs = np.linalg.eigh(rand5.laplacian())
    for k in range(1, 5):
        Q = chains.build_ep(rand5, k).Q
        for j in range(5):
            g = chains.lift_rw_eigenfunction(vecs[:, j], k, 5)
            assert np.linalg.norm(-Q @ g - lam[j] * g) <= 1e-9 * max(1.0, lam[-1]) * max(1.0, np.linalg.norm(g))


def test_dump_round_trip(rand5):
    gen = chains.build_ep(rand5, 2)
    header, Q = chains.load_matrix_dump(chains.dump_generator(gen))
    assert np.array_equal(Q, gen.Q)
    assert header["kind"] == "EP"
    assert len(header["states"]) == gen.dim


def test_rw_gap_on_path_closed_form():
    # unit path on n vertices: gap 2 - 2 cos(pi / n)
    for n in range(2, 8):
        g = WeightedGraph.path([1.0] * (n - 1))
        assert chains.build_rw(g).gap() == pytest.approx(2 - 2 * math.cos(math.pi / n), abs=1e-12)
