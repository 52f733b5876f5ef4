"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints.
"""
import contextlib
import glob
import json
import os
import time

import numpy as np
import pytest

from spinlab import cli, dhc
from spinlab.clifford import build_clifford_rep, clifford_residuals
from spinlab.identities import (
    bochner_residual,
    divergence_tensor,
    nodal_bound,
    solution_residual,
    stress_energy,
    trace_identity_residual,
)
from spinlab.models import ModelParams
from spinlab.monotonicity import (
    constant_spinor,
    euclidean_hessian_spectrum,
    gaussian_spinor,
    monotonicity_residual,
    radial_profile,
)
from spinlab.solver import resolve_on_grid, solve_branch
from spinlab.torus import ANTIPERIODIC, PERIODIC, constant_field, dirac_spectrum, l2_norm, resample

from conftest import make_dirac, record

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


@contextlib.contextmanager
def criterion(number, description):
    info = {"detail": ""}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException:
        record(number, description, False, f"{info['detail']} [{time.perf_counter() - t0:.2f}s]")
        raise
    record(number, description, True, f"{info['detail']} [{time.perf_counter() - t0:.2f}s]")


def observed_orders(errors):
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])


def test_criterion_01_clifford():
    with criterion(1, "Clifford relations for n = 2, 3, 4 within 1e-12") as info:
        t0 = time.perf_counter()
        worst = 0.0
        for n in (2, 3, 4):
            res = clifford_residuals(build_clifford_rep(n))
            worst = max(worst, max(res.values()))
            if n % 2 == 0:
                assert res["volume_square"] <= 1e-12
        elapsed = time.perf_counter() - t0
        info["detail"] = f"max deviation {worst:.1e}"
        assert worst <= 1e-12
        assert elapsed < 1.0


def test_criterion_02_spectrum():
    with criterion(2, "torus spectrum: 1/sqrt(2) antiperiodic, 0 periodic") as info:
        t0 = time.perf_counter()
        D = make_dirac(2, 32, ANTIPERIODIC)
        lam, _ = dirac_spectrum(D, 1)[0]
        Dp = make_dirac(2, 32, PERIODIC)
        lam_p, f_p = dirac_spectrum(Dp, 1)[0]
        res_p = l2_norm(Dp.apply(f_p.values) - lam_p * f_p.values, Dp.lattice)
        elapsed = time.perf_counter() - t0
        info["detail"] = f"|lam| = {abs(lam):.16f}, periodic lam = {lam_p:.1e} (res {res_p:.1e})"
        assert abs(abs(lam) - 0.7071067811865476) <= 1e-9
        assert abs(lam_p) <= 1e-12 and res_p <= 1e-10
        assert elapsed < 10.0


def test_criterion_03_exact_constant_solution():
    with criterion(3, "constant solution passes every identity within 1e-10") as info:
        c = np.array([0.6, 0.2j])
        mu = 1.0
        c2 = float(np.vdot(c, c).real)
        p = ModelParams(-mu * c2, mu)
        D = make_dirac(2, 16, PERIODIC)
        psi = constant_field(D.lattice, c)
        S = stress_energy(psi, p, D)
        vals = {
            "el_residual": solution_residual(psi, p, D),
            "divergence": float(np.max(np.abs(divergence_tensor(S)))),
            "bochner": float(np.max(np.abs(bochner_residual(psi, p, D)))),
        }
        prof = radial_profile(constant_spinor(c), 2, p, np.linspace(0.25, 4.0, 12))
        vals["monotonicity"] = float(np.max(np.abs(monotonicity_residual(prof, p).residual)))
        info["detail"] = ", ".join(f"{k} {v:.1e}" for k, v in vals.items())
        assert all(v <= 1e-10 for v in vals.values())


@pytest.fixture(scope="module")
def branch():
    t0 = time.perf_counter()
    D = make_dirac(2, 32, ANTIPERIODIC)
    start = dirac_spectrum(D, 1)[0]
    state = solve_branch(D, "soler", start, 0.5, 10, tol=1e-8, target_norm=1.0)
    ladder = [(D, state)]
    for N in (64, 128):
        Dn = make_dirac(2, N, ANTIPERIODIC)
        vals = resample(state.psi.values, D.lattice, (N, N))
        ladder.append((Dn, resolve_on_grid(Dn, "soler", state, vals, 1e-8)))
    return {"start": start, "state": state, "ladder": ladder, "elapsed": time.perf_counter() - t0}


def test_criterion_04_continuation(branch):
    with criterion(4, "continuation to mu = 0.5 and first-order slope of lambda") as info:
        state = branch["state"]
        lam0, f0 = branch["start"]
        # independent oracle: differentiate D psi = lam psi + mu |psi|^2 psi at mu = 0 and pair
        # with psi0, giving lam'(0) = -int |psi0|^4 / int |psi0|^2 for psi0 scaled to unit norm
        v = f0.values
        dA = f0.lattice.cell_volume
        v = v / np.sqrt(np.sum(np.abs(v) ** 2) * dA)
        rho = np.sum(np.abs(v) ** 2, axis=-1)
        oracle = -np.sum(rho ** 2) * dA / (np.sum(rho) * dA)
        (mu0, l0, _), (mu1, l1, _), (mu2, l2, _) = state.history[:3]
        # one-sided second-order difference at mu = 0
        slope = (-3 * l0 + 4 * l1 - l2) / (mu2 - mu0)
        rel = abs(slope - oracle) / abs(oracle)
        info["detail"] = (f"residual {state.residual_norm:.1e}, dlam/dmu {slope:.6f} vs oracle "
                          f"{oracle:.6f} (rel {rel:.1e})")
        assert state.mu == pytest.approx(0.5) and state.residual_norm <= 1e-8
        assert rel <= 0.02


def test_criterion_05_conservation_refinement(branch):
    with criterion(5, "stress divergence decays at order >= 1.5; trace identity <= 1e-8") as info:
        sups, traces = [], []
        for D, s in branch["ladder"]:
            p = ModelParams(s.lam, s.mu)
            S = stress_energy(s.psi, p, D)
            sups.append(float(np.max(np.abs(divergence_tensor(S)))))
            traces.append(float(np.max(np.abs(trace_identity_residual(S, s.psi, p)))))
        orders = observed_orders(sups)
        info["detail"] = (f"sup div {['%.1e' % x for x in sups]}, orders {np.round(orders, 2).tolist()}, "
                          f"trace {max(traces):.1e}")
        assert max(traces) <= 1e-8
        assert np.all(np.diff(sups) < 0) and np.all(orders >= 1.5)


def test_criterion_06_bochner_refinement(branch):
    with criterion(6, "Bochner L2 residual decays at order >= 1.5") as info:
        errs = []
        for D, s in branch["ladder"]:
            errs.append(l2_norm(bochner_residual(s.psi, ModelParams(s.lam, s.mu), D), D.lattice))
        orders = observed_orders(errs)
        info["detail"] = (f"L2 {['%.1e' % x for x in errs]}, orders {np.round(orders, 2).tolist()}, "
                          f"ladder built in {branch['elapsed']:.1f}s")
        assert branch["elapsed"] < 300
        assert np.all(orders >= 1.5)


def test_criterion_07_nodal_bound():
    with criterion(7, "nodal bound for the lowest antiperiodic eigenfield") as info:
        D = make_dirac(2, 32, ANTIPERIODIC)
        lam, f = dirac_spectrum(D, 1)[0]
        rep = nodal_bound(f, ModelParams(lam, 0.0), D)
        info["detail"] = f"N = {rep.zero_count}, lhs {rep.lhs:.6f}, 4 pi N = {rep.rhs:.6f}, margin {rep.margin:.6f}"
        assert rep.is_solution
        assert rep.margin >= 0
        assert rep.lhs == pytest.approx(lam ** 2 * D.lattice.volume, rel=1e-12)


def test_criterion_08_monotonicity():
    with criterion(8, "Omega = 2 - n; constant solution identity; Gaussian control") as info:
        omegas = [euclidean_hessian_spectrum(n).Omega for n in (2, 3, 4)]
        assert omegas == [0.0, -1.0, -2.0]
        c = np.array([0.6, 0.0])
        p = ModelParams(-0.36, 1.0)
        radii = np.linspace(0.25, 5.0, 20)
        res = monotonicity_residual(radial_profile(constant_spinor(c), 3, p, radii), p)
        worst = float(np.max(np.abs(res.residual)))
        g_radii = np.array([0.5, 0.75, 1.0, 1.25, 1.5])
        g = monotonicity_residual(radial_profile(gaussian_spinor(c), 3, p, g_radii), p)
        control = abs(float(g.residual[2]))
        info["detail"] = f"Omega {omegas}, constant residual {worst:.1e}, Gaussian residual at r=1 {control:.3f}"
        assert worst <= 1e-8
        assert control >= 1e-3


def test_criterion_09_dhc():
    with criterion(9, "DHC wrap residuals, trace, gradient oracle, flat Liouville constants") as info:
        t0 = time.perf_counter()
        D = make_dirac(2, 32, PERIODIC)
        target = dhc.sphere_target()
        phi = dhc.equator_wrap(D.lattice)
        psi = dhc.VectorSpinorField(D.lattice, np.zeros(D.lattice.sizes + (3, 2), complex))
        m, s = dhc.residual_norms(phi, psi, target, D)
        trace = float(np.max(np.abs(dhc.dhc_stress_energy(phi, psi, target, D).trace_defect)))
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(5):
            rphi, rpsi = dhc.random_smooth_pair(D.lattice, target, rng)
            V, Xi = dhc.random_tangent_direction(rphi, target, rng)
            fd = dhc.finite_difference_gradient(rphi, rpsi, target, D, V, Xi)
            an = dhc.residual_pairing(rphi, rpsi, target, D, V, Xi)
            worst = max(worst, abs(fd - an) / abs(an))
        c1, c2 = dhc.liouville_constants(dhc.flat_target().sup_bounds, 2)
        elapsed = time.perf_counter() - t0
        info["detail"] = (f"map {m:.1e}, spinor {s:.1e}, trace {trace:.1e}, fd rel {worst:.1e}, "
                          f"flat (c1, c2) = ({c1}, {c2})")
        assert m <= 1e-10 and s <= 1e-10
        assert trace == 0.0
        assert worst <= 1e-5
        assert (c1, c2) == (0.0, 1.0)
        assert elapsed < 120


def test_criterion_10_determinism(tmp_path):
    with criterion(10, "repeated CLI runs give byte-identical CSVs") as info:
        configs = sorted(glob.glob(os.path.join(ROOT, "configs", "*.json")))
        assert configs
        compared = 0
        for path in configs:
            with open(path) as fh:
                command = json.load(fh)["command"]
            outs = []
            for k in range(2):
                out = tmp_path / f"{os.path.basename(path)[:-5]}_{k}"
                status = cli.main([command, "--config", path, "--out", str(out)])
                assert status in (0, 1)
                outs.append(out)
            names = sorted(p.name for p in outs[0].iterdir() if p.suffix == ".csv")
            assert names == sorted(p.name for p in outs[1].iterdir() if p.suffix == ".csv")
            for name in names:
                assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
                compared += 1
        info["detail"] = f"{len(configs)} configs, {compared} CSV pairs identical"
