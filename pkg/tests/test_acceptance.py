"""End-to-end acceptance gate.

Each test exercises one numbered criterion at its stated tolerance and
prints a single PASS/FAIL line through the capture so the gate is
readable straight off the pytest log. The heavy runs (criteria 6-8) are
cached at module scope and reused.
"""

import time

import numpy as np
import pytest

from benlab.evolution import EvolutionConfig, energy, evolve, evolve_perturbation, mass
from benlab.experiments import ExperimentConfig, make_perturbation, run_stability
from benlab.modulation import fit_translation, match_speed, track_modulation
from benlab.monotonicity import (
    commutator_defect,
    commutator_derivative_defect,
    monotonicity_sweep,
    periodic_plateau,
)
from benlab.spectral import (
    Field,
    derivative,
    fractional_derivative,
    hilbert,
    inner,
    integrate,
    make_grid,
    norm,
    shift,
)
from benlab.waves import (
    WaveParams,
    continue_branch,
    petviashvili_solve,
    speed_derivative,
)


def announce(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def _band_limited(grid, seed):
    rng = np.random.default_rng(seed)
    hat = np.zeros(grid.n // 2 + 1, complex)
    kmax = grid.n // 8
    hat[1:kmax] = rng.standard_normal(kmax - 1) + 1j * rng.standard_normal(kmax - 1)
    return Field.from_hat(grid, hat)


# ---------------------------------------------------------------- 1
def test_criterion_1_spectral_identities(capsys):
    t0 = time.time()
    grid = make_grid(1024, 2 * np.pi * 32)
    worst = 0.0
    for seed in range(5):
        u = _band_limited(grid, seed)
        scale = norm(u, "linf")
        hcos = hilbert(Field(grid, np.cos(grid.x)))
        worst = max(worst, np.max(np.abs(hcos.values + np.sin(grid.x))))
        hh = hilbert(hilbert(u))
        mean = integrate(u.values, grid) / grid.L
        worst = max(worst, np.max(np.abs(hh.values + u.values - mean)) / scale)
        lhs = hilbert(derivative(u, 1))
        rhs = fractional_derivative(u, 1.0)
        worst = max(worst, np.max(np.abs(lhs.values + rhs.values)) / norm(rhs, "linf"))
        direct = np.sqrt(integrate(u.values**2, grid))
        worst = max(worst, abs(norm(u, "l2") - direct) / direct)
    dt = time.time() - t0
    ok = worst < 1e-12 and dt < 1.0
    announce(capsys, 1, ok, f"worst relative defect {worst:.3e}, {dt:.2f}s")


# ---------------------------------------------------------------- 2
def test_criterion_2_closed_form_oracle(capsys):
    t0 = time.time()
    grid = make_grid(1024, 200.0)
    wave = petviashvili_solve(WaveParams(0.0, 1.0), grid)
    q = wave.profile
    exact = 3.0 / np.cosh(grid.x / 2) ** 2
    sup = float(np.max(np.abs(q.values - exact)))
    m_err = abs(mass(q) - 12.0)
    e_err = abs(energy(q, 0.0) + 7.2)
    l2_err = abs(norm(q, "l2") ** 2 - 24.0)
    _, dl2dc, _ = speed_derivative(WaveParams(0.0, 1.0), grid)
    d_err = abs(dl2dc - 36.0)
    dt = time.time() - t0
    ok = (
        sup < 1e-8 and m_err < 1e-8 and e_err < 1e-7 and l2_err < 1e-8
        and d_err < 1e-3 and dt < 10.0
    )
    announce(
        capsys, 2,
        ok,
        f"sup {sup:.2e}, |M-12| {m_err:.2e}, |E+7.2| {e_err:.2e}, "
        f"|l2sq-24| {l2_err:.2e}, |d/dc-36| {d_err:.2e}, {dt:.1f}s",
    )


# ---------------------------------------------------------------- 3
def test_criterion_3_conservation(capsys):
    t0 = time.time()
    grid = make_grid(1024, 200.0)
    wave = continue_branch(0.2, 1.0, grid)
    pert = make_perturbation(grid, "noise", 0.01 * norm(wave.profile, "h1"), 0.0, 1)
    u0 = wave.profile + pert
    traj = evolve(u0, 0.2, EvolutionConfig(dt=5e-4, T=10.0, record_every=2000))
    m0, e0 = traj.records[0].mass, traj.records[0].energy
    dm = max(abs(r.mass - m0) for r in traj.records) / abs(m0)
    de = max(abs(r.energy - e0) for r in traj.records) / abs(e0)

    # dt-halving pair against a fine reference confirms 4th order
    T = 0.25
    ref = evolve(u0, 0.2, EvolutionConfig(dt=T / 1024, T=T, record_every=1024)).final
    errs = [
        norm(
            evolve(u0, 0.2, EvolutionConfig(dt=T / k, T=T, record_every=k)).final
            - ref,
            "l2",
        )
        for k in (64, 128)
    ]
    ratio = errs[0] / errs[1]
    dt = time.time() - t0
    ok = dm < 1e-9 and de < 1e-8 and 12.0 < ratio < 20.0 and dt < 300.0
    announce(
        capsys, 3,
        ok, f"dM/M {dm:.2e}, dE/E {de:.2e}, dt-halving ratio {ratio:.1f}, {dt:.0f}s",
    )


# ---------------------------------------------------------------- 4
def test_criterion_4_traveling_wave(capsys):
    t0 = time.time()
    results = []
    for gamma in (0.2, -0.2):
        grid = make_grid(2048, 400.0)
        wave = continue_branch(gamma, 1.0, grid)
        cfg = EvolutionConfig(dt=5e-4, T=20.0, record_every=4000, snapshot_every=1)
        traj = evolve(wave.profile, gamma, cfg)
        expected = shift(wave.profile, -20.0)
        h1_err = norm(traj.final - expected, "h1")
        recs = track_modulation(traj, WaveParams(gamma, 1.0), profile=wave.profile)
        speed = recs[len(recs) // 2].rho_dot
        results.append((gamma, h1_err, speed))
    dt = time.time() - t0
    ok = all(h < 1e-6 and abs(s - 1.0) < 1e-3 for _, h, s in results)
    detail = ", ".join(
        f"gamma={g}: H1 {h:.2e}, speed {s:.6f}" for g, h, s in results
    )
    announce(capsys, 4, ok, detail + f", {dt:.0f}s")


# ---------------------------------------------------------------- 5
def test_criterion_5_modulation(capsys):
    grid = make_grid(2048, 400.0)
    gamma = 0.1
    wave = continue_branch(gamma, 1.0, grid)
    q = wave.profile

    # scan oracle vs refined fit
    s_true = 17.3
    u = shift(q, -s_true)
    fitted = fit_translation(u, q)
    scan_err = abs(fitted - s_true)

    # perturbed run: orthogonality on every snapshot and the speed bound
    pert = make_perturbation(grid, "even", 0.01 * norm(q, "h1"), 0.0, 2)
    cfg = EvolutionConfig(dt=5e-4, T=10.0, record_every=2000, snapshot_every=1)
    traj = evolve(q + pert, gamma, cfg)
    recs = track_modulation(traj, WaveParams(gamma, 1.0), profile=q)
    ortho_ok = all(r.ortho_defect < 1e-8 for r in recs if r.ok)
    c_star = match_speed(
        norm(Field(grid, traj.final.values), "l2") ** 2, gamma, grid
    )
    interior = [r for r in recs[1:-1] if r.ok]
    cfits = [
        abs(r.rho_dot - c_star) / max(r.eta_l2, 1e-30) for r in interior
    ]
    c_fit = max(cfits)
    ok = scan_err < 1e-6 and ortho_ok and np.isfinite(c_fit)
    announce(
        capsys, 5,
        ok,
        f"fit error {scan_err:.2e}, ortho ok {ortho_ok}, C_fit {c_fit:.3g}",
    )


# ---------------------------------------------------------------- 6
def test_criterion_6_monotonicity_defects(capsys):
    t0 = time.time()
    gamma = 0.1
    R_list = [10.0, 20.0, 40.0, 80.0]
    results = {}
    for n in (2048, 4096):
        grid = make_grid(n, 400.0)
        wave = continue_branch(gamma, 1.0, grid)
        q = wave.profile
        pert = make_perturbation(grid, "even", 0.01 * norm(q, "h1"), 0.0, 3)
        cfg = EvolutionConfig(dt=2.5e-4, T=10.0, record_every=4000, snapshot_every=1)
        traj = evolve(q + pert, gamma, cfg)
        recs = track_modulation(traj, WaveParams(gamma, 1.0), profile=q)
        xs = [r.rho for r in recs]
        ks = {}
        for which in ("I_right", "combo4IJ", "H_right"):
            rep = monotonicity_sweep(traj, xs, R_list, gamma, which=which)
            ks[which] = rep["K"]
        results[n] = ks
    ratios = {
        w: results[4096][w] / max(results[2048][w], 1e-300)
        for w in results[2048]
    }
    stable = all(0.5 < r < 2.0 or results[2048][w] < 1e-10
                 for w, r in ratios.items())
    finite = all(np.isfinite(k) for k in results[2048].values())
    dt = time.time() - t0
    ok = stable and finite and dt < 900.0
    detail = ", ".join(
        f"{w}: K={results[2048][w]:.3g} (x{ratios[w]:.2f} at 2x res)"
        for w in results[2048]
    )
    announce(capsys, 6, ok, detail + f", {dt:.0f}s")


# ---------------------------------------------------------------- 7
def test_criterion_7_liouville_tails(capsys):
    t0 = time.time()
    grid = make_grid(2048, 400.0)
    R_list = (20.0, 40.0, 80.0, 160.0)

    def c_for(gamma, b):
        wave = continue_branch(gamma, 1.0, grid)
        v0 = make_perturbation(grid, "even", 0.25, 0.0, 4)
        cfg = EvolutionConfig(dt=5e-4, T=10.0, record_every=2000)
        traj = evolve_perturbation(
            v0, WaveParams(gamma, 1.0), b, a=0.0, xdot=1.0, cfg=cfg,
            profile=wave.profile, tail_r_list=R_list,
        )
        tails = {R: max(t[1][R] for t in traj.tail_records) for R in R_list}
        return max(tails[R] * R**0.25 for R in R_list)

    c_base = c_for(0.1, 1e-3)
    c_half_b = c_for(0.1, 5e-4)
    c_double_g = c_for(0.2, 1e-3)
    r_b = c_half_b / c_base
    r_g = c_double_g / c_base
    dt = time.time() - t0
    ok = 0.5 < r_b < 2.0 and 0.5 < r_g < 2.0
    announce(
        capsys, 7,
        ok,
        f"C {c_base:.3g}, b/2 ratio {r_b:.2f}, gamma*2 ratio {r_g:.2f}, {dt:.0f}s",
    )


# ---------------------------------------------------------------- 8
def test_criterion_8_stability(capsys):
    t0 = time.time()
    details = []
    ok = True
    for gamma in (0.1, -0.1):
        # wide box: the algebraic forward tail of the profile must not
        # overlap the sponge band as the wave crosses
        cfg = ExperimentConfig(
            gamma=gamma, T=200.0, n=4096, L=800.0, dt=5e-4,
            record_every=2000, snapshot_every=1, seed=0,
        )
        rep = run_stability(cfg)
        good = (
            rep.flags["error_decreasing"]
            and rep.flags["xdot_matches_cstar"]
            and not rep.flags["orbit_lost"]
        )
        ok = ok and good
        details.append(
            f"gamma={gamma}: c*={rep.c_star:.5f}, "
            f"xdot(T)={rep.xdot[-1]:.5f}, decreasing={rep.flags['error_decreasing']}"
        )
    dt = time.time() - t0
    ok = ok and dt < 1800.0
    announce(capsys, 8, ok, "; ".join(details) + f", {dt:.0f}s")


# ---------------------------------------------------------------- 9
def test_criterion_9_commutators(capsys):
    t0 = time.time()
    grid = make_grid(2048, 400.0)
    f = Field(grid, np.tanh(grid.x / 15))

    ratios = []
    for seed in range(200):
        u = _band_limited(grid, seed)
        ratios.append(commutator_defect(f, u)["ratio"])
    bounded = max(ratios) < 50.0
    inv = abs(
        commutator_defect(f * 3.7, _band_limited(grid, 0))["ratio"] - ratios[0]
    )

    # the moving-weight family: ensemble-RMS left side against R^{-(2-eps)3/4}
    eps = 0.1
    R_list = np.array([10.0, 20.0, 40.0, 80.0])
    rms = []
    for R in R_list:
        plateau = periodic_plateau(grid, R, center=-grid.L / 5, extent=grid.L / 4)
        vals = [
            commutator_derivative_defect(plateau, _band_limited(grid, s), eps)["left"]
            for s in range(32)
        ]
        rms.append(float(np.sqrt(np.mean(np.array(vals) ** 2))))
    slope = float(np.polyfit(np.log(R_list), np.log(rms), 1)[0])
    target = -(2 - eps) * 0.75
    slope_err = abs(slope - target) / abs(target)
    dt = time.time() - t0
    ok = bounded and inv < 1e-10 and slope_err < 0.15
    announce(
        capsys, 9,
        ok,
        f"max ratio {max(ratios):.3g}, scale invariance {inv:.2e}, "
        f"slope {slope:.3f} vs {target:.3f} ({100 * slope_err:.1f}%), {dt:.0f}s",
    )
