"""Acceptance gate: one test per criterion, each reported as PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v``; the summary section at the
end of the run lists every criterion with its measured values.
"""

import itertools
import json
import time
import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from oracles import confusion, loop_step, shift_closing
from trinarize import cli, phantom, reaction, solver
from trinarize.evaluate import score, sweep
from trinarize.grid import L0, L1, LMID, grid_spec
from trinarize.pipeline import METHOD_NAMES, segment_lenient
from trinarize.postprocess import DiskKernel, closing
from trinarize.reaction import MAX_ABS_SOURCE, ModelParams
from trinarize.solver import StabilityWarning, default_params

pytestmark = pytest.mark.slow

DEFAULT_ROOTS = (0.5, 0.65, 0.7)


def report(criterion, name, ok, detail):
    criterion(name, ok, detail)
    assert ok, detail


def random_valid_roots(rng, n):
    out = []
    while len(out) < n:
        a, b, c = np.sort(rng.uniform(0, 1, 3))
        if min(a, b - a, c - b, 1 - c) > 1e-3:
            out.append((float(a), float(b), float(c)))
    return out


# 1 --------------------------------------------------------------------------

def test_c01_source_bound(criterion):
    start = time.perf_counter()
    grid = np.linspace(0.0, 1.0, 201)
    best = 0.0
    # full 4-D grid, vectorized over (a, b, c) for each u
    for u in grid:
        d = np.abs(u - grid)
        vals = u * abs(u - 1.0) * (d[:, None, None] * d[None, :, None] * d[None, None, :])
        best = max(best, float(vals.max()))
    # random points anywhere in the cube
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 1, (2_000_000, 4))
    rand_best = float(np.max(np.abs(reaction.quintic(*pts.T))))
    elapsed = time.perf_counter() - start
    ok = (reaction.max_abs_source() == 256 / 3125
          and best <= MAX_ABS_SOURCE + 1e-9 and rand_best <= MAX_ABS_SOURCE + 1e-9
          and abs(best - MAX_ABS_SOURCE) < 1e-9 and elapsed < 60)
    report(criterion, "C1 source bound 256/3125", ok,
           f"grid max {best:.12f}, random max {rand_best:.12f}, "
           f"constant {MAX_ABS_SOURCE:.12f}, {elapsed:.1f}s")


# 2 --------------------------------------------------------------------------

def test_c02_equilibria(criterion):
    rng = np.random.default_rng(2)
    worst = 0.0
    ok = True
    for a, b, c in random_valid_roots(rng, 100):
        p = ModelParams(a=a, b=b, c=c)
        eq = reaction.classify_equilibria(p)
        ok &= len(eq) == 5
        ok &= [e.stability for e in eq] == ["stable", "unstable", "stable", "unstable", "stable"]
        # sign of f' from finite differences, independent of the analytic derivative
        for e in eq:
            h = 1e-7
            slope = (reaction.source(e.root + h, p) - reaction.source(e.root - h, p)) / (2 * h)
            ok &= (slope < 0) == (e.stability == "stable")
            worst = max(worst, abs(float(reaction.source(e.root, p))))
    ok &= worst < 1e-12
    report(criterion, "C2 equilibria pattern S,U,S,U,S", ok,
           f"100 random (a,b,c), max |f(root)| = {worst:.1e}")


# 3 --------------------------------------------------------------------------

def test_c03_fixed_points(criterion):
    rng = np.random.default_rng(3)
    shape = (24, 32)
    g = grid_spec(np.zeros(shape))
    worst = 0.0
    for roots in [DEFAULT_ROOTS] + random_valid_roots(rng, 3):
        p = default_params(g, a=roots[0], b=roots[1], c=roots[2])
        for value in (0.0, *roots, 1.0):
            u0 = np.full(shape, value)
            u = u0
            # solve() would stop after one zero-change step, so step explicitly
            for _ in range(1000):
                u = solver.step(u, p, g, clamp=False)
            worst = max(worst, float(np.max(np.abs(u - u0))))
    report(criterion, "C3 uniform equilibria are fixed for 1000 steps", worst <= 1e-14,
           f"max deviation {worst:.1e}")


# 4 --------------------------------------------------------------------------

def test_c04_reaction_only_basins(criterion):
    u0s = np.round(np.arange(1, 10) * 0.1, 10)
    g = grid_spec(np.zeros((16, 16)))
    p = default_params(g, c_D=0.0, max_steps=20000)
    a, b, c = p.a, p.b, p.c
    # with c_D = 0 each pixel obeys du/ds = f(u), s = c_S t
    horizon = p.c_S * p.dt * p.max_steps
    worst, lines = 0.0, []
    for u0 in u0s:
        out = solver.solve(np.full((16, 16), u0), p)
        ref = solve_ivp(lambda s, u: reaction.quintic(u, a, b, c), (0.0, horizon), [u0],
                        method="RK45", max_step=0.5, rtol=1e-10, atol=1e-12).y[0, -1]
        err = float(np.max(np.abs(out.final - ref)))
        worst = max(worst, err)
        lines.append(f"{u0:.1f}->{ref:.3f}")
    report(criterion, "C4 reaction-only basins match ODE reference", worst <= 1e-3,
           f"max error {worst:.1e}; " + " ".join(lines))


# 5 --------------------------------------------------------------------------

def _diffusion_error(N, c_D=0.01, T=5.0, r=0.2):
    h = 1.0 / (N - 1)
    steps = int(round(T * c_D / (r * h * h)))
    dt = T / steps
    x = np.linspace(0.0, 1.0, N)
    exact0 = np.outer(np.cos(np.pi * x), np.cos(np.pi * x))
    u0 = exact0 + 0.5
    p = ModelParams(c_D=c_D, c_S=0.0, dt=dt, max_steps=steps, steady_tol=0.0)
    mean0 = solver.trapezoid_mean(u0)
    drift = [0.0]
    prev = [mean0]

    def track(n, u):
        m = solver.trapezoid_mean(u)
        drift[0] = max(drift[0], abs(m - prev[0]))
        prev[0] = m

    out = solver.solve(u0, p, clamp=False, callback=track)
    exact = np.exp(-2 * np.pi ** 2 * c_D * T) * exact0 + 0.5
    return float(np.max(np.abs(out.final - exact))), drift[0]


def test_c05_diffusion_convergence(criterion):
    sizes = (33, 65, 129)
    results = [_diffusion_error(N) for N in sizes]
    errors = [e for e, _ in results]
    drift = max(d for _, d in results)
    orders = [float(np.log2(errors[k] / errors[k + 1])) for k in range(2)]
    ok = min(orders) >= 1.8 and drift <= 1e-12
    report(criterion, "C5 diffusion convergence order and conservation", ok,
           f"errors {', '.join(f'{e:.2e}' for e in errors)}; orders "
           f"{', '.join(f'{o:.3f}' for o in orders)}; max per-step mean change {drift:.1e}")


# 6 --------------------------------------------------------------------------

def test_c06_scheme_forms(criterion):
    rng = np.random.default_rng(6)
    worst = 0.0
    for a, b, c in random_valid_roots(rng, 100):
        u = rng.uniform(0, 1, (32, 32))
        g = grid_spec(u)
        p = default_params(g, a=a, b=b, c=c, c_D=float(rng.uniform(0.001, 0.1)))
        loop = loop_step(u, p, g.dx, g.dy)
        stencil = solver.step(u, p, clamp=False)
        matrix = solver.step_matrix_form(u, p, clamp=False)
        worst = max(worst, float(np.max(np.abs(loop - matrix))),
                    float(np.max(np.abs(stencil - matrix))))
    # and along one 100-step trajectory
    u = v = rng.uniform(0, 1, (32, 32))
    p = default_params(grid_spec(u))
    for _ in range(100):
        u, v = solver.step(u, p), solver.step_matrix_form(v, p)
    worst = max(worst, float(np.max(np.abs(u - v))))
    report(criterion, "C6 stencil, loop and matrix forms agree", worst <= 1e-12,
           f"max elementwise difference {worst:.1e} over 100 random 32x32 steps")


# 7 --------------------------------------------------------------------------

def test_c07_stability_guard(criterion):
    image, _ = phantom.generate(phantom.PhantomSpec(
        height=101, width=101, center=(50, 44), semi_axes=(20, 12.5), tail_length=30))
    g = grid_spec(image)
    p = default_params(g)
    rep = reaction.check_stability(p, g)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = solver.solve(image, p, clamp=False)
    warned = any(issubclass(w.category, StabilityWarning) for w in caught)
    bounded = bool(np.all(np.isfinite(out.final))) and out.final.min() >= 0 and out.final.max() <= 1
    flipped = reaction.check_stability(p.replace(c_D=0.1), g)
    ok = (abs(rep.lhs - 0.04096) < 1e-12 and abs(rep.rhs - 0.005) < 1e-12
          and not rep.satisfied and warned and bounded and flipped.satisfied)
    report(criterion, "C7 stability guard at defaults", ok,
           f"lhs={rep.lhs:.6g} rhs={rep.rhs:.6g} satisfied={rep.satisfied}; warned={warned}; "
           f"output range [{out.final.min():.3f}, {out.final.max():.3f}]; "
           f"c_D=0.1 satisfied={flipped.satisfied}")


# 8 --------------------------------------------------------------------------

def test_c08_metrics_oracle(criterion):
    levels = np.array([L0, LMID, L1])
    truth = np.array([[L0, LMID, L1], [LMID, L1, L0], [L1, L0, LMID]])
    mismatches = 0
    for combo in itertools.product(range(3), repeat=9):
        pred = levels[list(combo)].reshape(3, 3)
        r = score(pred, truth)
        for c, label in ((r.class1, LMID), (r.class2, L0)):
            mismatches += (c.tp, c.fp, c.fn, c.tn) != confusion(pred, truth, label)
    rng = np.random.default_rng(8)
    f1_err = 0.0
    for _ in range(1000):
        pred = levels[rng.integers(0, 3, (16, 16))]
        tru = levels[rng.integers(0, 3, (16, 16))]
        r = score(pred, tru)
        for c, label in ((r.class1, LMID), (r.class2, L0)):
            tally = confusion(pred, tru, label)
            mismatches += (c.tp, c.fp, c.fn, c.tn) != tally
            tp, fp, fn, _ = tally
            if tp:
                prec, rec = tp / (tp + fp), tp / (tp + fn)
                f1_err = max(f1_err, abs(c.f1 - 2 * prec * rec / (prec + rec)))
    ok = mismatches == 0 and f1_err <= 1e-12
    report(criterion, "C8 metrics match brute-force tallies", ok,
           f"{3 ** 9} exhaustive + 1000 random pairs, {mismatches} mismatches, "
           f"max F1 formula gap {f1_err:.1e}")


# 9 --------------------------------------------------------------------------

def test_c09_morphology_oracle(criterion):
    rng = np.random.default_rng(9)
    n = 100_000
    radii = rng.integers(0, 3, n)
    density = rng.uniform(0.05, 0.8, n)[:, None, None]
    masks = rng.random((n, 8, 8)) < density
    mismatches = not_extensive = not_idempotent = 0
    for r in range(3):
        idx = np.flatnonzero(radii == r)
        want = shift_closing(masks[idx], r)
        k = DiskKernel(r)
        for m, w in zip(masks[idx], want):
            got = closing(m, k)
            mismatches += not np.array_equal(got, w)
            not_extensive += not np.all(got[m])
            not_idempotent += not np.array_equal(closing(got, k), got)
    ok = mismatches == 0 and not_extensive == 0 and not_idempotent == 0
    report(criterion, "C9 closing matches shift oracle", ok,
           f"{n} random 8x8 masks, radius 0-2: {mismatches} mismatches, "
           f"{not_extensive} non-extensive, {not_idempotent} non-idempotent")


# 10 -------------------------------------------------------------------------

def test_c10_phantom_end_to_end(criterion):
    start = time.perf_counter()
    specs = phantom.suite(5, seed=0)
    pairs = [phantom.generate(s) for s in specs]
    table = {}
    for method in METHOD_NAMES:
        reports = [score(segment_lenient(img, method)[0], truth) for img, truth in pairs]
        table[method] = (np.mean([r.class1.f1 for r in reports]),
                         np.mean([r.class2.f1 for r in reports]),
                         np.mean([r.average_f1 for r in reports]))
    elapsed = time.perf_counter() - start
    pde1, pde2, pde = table["pde"]
    beats = all(pde > table[m][2] for m in METHOD_NAMES if m != "pde")
    ok = pde1 >= 0.90 and pde2 >= 0.90 and beats and elapsed < 300
    detail = "; ".join(f"{m} {v[2]:.4f}" for m, v in table.items())
    report(criterion, "C10 phantom end-to-end, PDE best", ok,
           f"PDE class1 {pde1:.4f} class2 {pde2:.4f}; average F1: {detail}; {elapsed:.1f}s")


# 11 -------------------------------------------------------------------------

def test_c11_sweep_sanity(criterion):
    image, truth = phantom.generate(phantom.suite(1, seed=0)[0])
    a_values = np.linspace(0.4, 0.6, 5)
    c_values = np.linspace(0.66, 0.74, 5)
    grid = sweep(image, truth, a_values, c_values, b=0.65)
    lines = grid.to_csv().splitlines()
    rows = [tuple(float(x) for x in line.split(",")) for line in lines[1:]]
    well_formed = (lines[0] == "a,c,avg_f1" and len(rows) == 25
                   and all(len(r) == 3 and 0 <= r[2] <= 1 for r in rows))
    default = next(v for a, c, v in rows if abs(a - 0.5) < 1e-12 and abs(c - 0.7) < 1e-12)
    best_a, best_c, best = grid.best()
    ok = well_formed and best - default <= 0.05
    report(criterion, "C11 sweep argmax near the default cell", ok,
           f"default (0.5, 0.7) {default:.4f}; best ({best_a:g}, {best_c:g}) {best:.4f}")


# 12 -------------------------------------------------------------------------

def _run_all_commands(root, capsys):
    """Run every subcommand once under ``root``; return every output's bytes."""
    ph = root / "ph"
    outputs = {}

    def call(key, *argv):
        code = cli.main([str(a) for a in argv])
        captured = capsys.readouterr()
        outputs[key + ":exit"] = str(code).encode()
        # paths differ between runs; strip them before comparing console text
        outputs[key + ":stdout"] = captured.out.replace(str(root), "<root>").encode()

    call("phantom", "phantom", "--out-dir", ph, "--count", 3, "--seed", 11, "--size", "96x96")
    img, truth = ph / "phantom_000.png", ph / "phantom_000_truth.png"
    for method in METHOD_NAMES:
        call("trinarize-" + method, "trinarize", img, "--method", method, "--seed", 7,
             "--disk-radius", 15, "--truth", truth, "--out", root / f"t_{method}.png")
    call("analyze", "analyze", "--csv", root / "phase.csv")
    call("sweep", "sweep", img, truth, "--a-values", "0.45:0.55:3", "--c-values", "0.68,0.72",
         "--disk-radius", 15, "--out", root / "sweep.csv")
    call("bench", "bench", "--inputs", ph / "phantom_00?.png", "--truths",
         ph / "phantom_*_truth.png", "--disk-radius", 15, "--seed", 3,
         "--out", root / "bench.csv", "--timings", root / "timings.csv")
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.name != "timings.csv":
            outputs[str(path.relative_to(root))] = path.read_bytes()
    return outputs


def test_c12_cli_determinism(criterion, tmp_path, capsys):
    first = _run_all_commands(tmp_path / "run1", capsys)
    second = _run_all_commands(tmp_path / "run2", capsys)
    differing = sorted(k for k in first.keys() | second.keys()
                       if first.get(k) != second.get(k))
    reports = [json.loads(first[k]) for k in first if k.endswith(".json")]
    exits_ok = all(v == b"0" for k, v in first.items() if k.endswith(":exit"))
    ok = not differing and exits_ok and len(reports) == len(METHOD_NAMES)
    report(criterion, "C12 CLI reruns are byte-identical", ok,
           f"{len(first)} outputs compared across 5 subcommands; differing: {differing or 'none'}")
