import math

import numpy as np
import pytest

import trajphase as tp


def test_closed_form_value():
    p = tp.DephasingParams(omega=1.0, lam=0.1, f=2.0, theta0=math.pi / 2)
    assert tp.gamma_nj_closed_form(p) == pytest.approx(-0.8582590, abs=1e-6)


def test_no_jump_phase_matches_closed_form():
    p = tp.DephasingParams(omega=1.0, lam=0.3, f=0.5, theta0=math.pi / 3)
    res = tp.no_jump_geometric_phase(p.model(), p.shifts(), p.initial_state(), p.period)
    diff = math.remainder(res.gamma - tp.gamma_nj_closed_form(p), 2 * math.pi)
    assert abs(diff) < 1e-8
    assert res.zero_crossing is None


def test_evolve_density_shapes_and_trace():
    p = tp.DephasingParams(lam=0.2)
    rho0 = tp.density_from_state(p.initial_state())
    times, states = tp.evolve_density(p.model(), rho0, 2.0, steps=200)
    assert times.shape == (201,)
    assert states.shape == (201, 2, 2)
    assert np.allclose(np.trace(states, axis1=1, axis2=2), 1.0, atol=1e-12)
    coherence = abs(states[-1, 0, 1])
    assert coherence == pytest.approx(0.5 * math.exp(-2 * 0.2 * 2.0), abs=1e-9)


def test_hidden_shift():
    sz = tp.pauli("z")
    model = tp.LindbladModel(0.5 * sz, [sz], 0.1)
    assert tp.shift_is_hidden(model, [2.0])
    assert not tp.shift_is_hidden(model, [2.0j])
    decay = tp.LindbladModel(0.5 * sz, [tp.pauli("x") - 1j * tp.pauli("y")], 0.1)
    assert not tp.shift_is_hidden(decay, [0.5j])
    assert np.abs(tp.shift_hamiltonian_term(model, [2.0])).max() < 1e-15


def test_ensembles_are_seeded():
    p = tp.DephasingParams(lam=0.1, f=1.0)
    a = tp.average_jump_ensemble(p.model(), p.shifts(), p.initial_state(), 1.0, 1e-2, 64, seed=3)
    b = tp.average_jump_ensemble(p.model(), p.shifts(), p.initial_state(), 1.0, 1e-2, 64, seed=3)
    assert a["jump_counts"] == b["jump_counts"]
    q = tp.averaged_geometric_phase(p.model(), p.shifts(), p.initial_state(), math.pi / 2, 1e-2, 200, seed=5)
    assert q.n_used == 200
    assert math.isfinite(q.alpha_g)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        tp.pauli("w")
    with pytest.raises(ValueError):
        tp.LindbladModel(np.zeros((2, 2)), [np.zeros((3, 3))], 0.1)
