#!/usr/bin/env python3
"""Smoke test for the nehari_fs_py extension module.

Build the module first:

    cargo build -p nehari-fs-py --release

then run this script from the repository root (or anywhere):

    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path


def load_module():
    repo = Path(__file__).resolve().parent.parent
    candidates = [
        repo / "target" / "release" / "libnehari_fs_py.so",
        repo / "target" / "debug" / "libnehari_fs_py.so",
        repo / "target" / "release" / "libnehari_fs_py.dylib",
        repo / "target" / "debug" / "libnehari_fs_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p nehari-fs-py --release")
    stage = Path(tempfile.mkdtemp(prefix="nehari_fs_py_"))
    suffix = ".so" if built.suffix == ".so" else ".so"
    shutil.copy2(built, stage / f"nehari_fs_py{suffix}")
    sys.path.insert(0, str(stage))
    import nehari_fs_py

    return nehari_fs_py


def check(label, ok, detail=""):
    status = "ok" if ok else "FAIL"
    print(f"  {label:<52} {status}  {detail}")
    if not ok:
        sys.exit(f"smoke test failed at: {label}")


def main():
    nf = load_module()
    print("nehari_fs_py smoke test")

    # spectral operator: cos(2*pi*x) on the unit cell is an eigenfunction
    # of (-Delta)^{alpha/2} with eigenvalue (2*pi)^alpha
    grid = nf.TorusGrid(1, 1, 64)
    xs = [p[0] for p in grid.points()]
    cos_field = nf.Field(grid, [math.cos(2.0 * math.pi * x) for x in xs])
    lap = nf.frac_laplacian(cos_field, 1.0)
    eig = max(
        abs(l - 2.0 * math.pi * v) for l, v in zip(lap.values(), cos_field.values())
    )
    check("cosine eigenfunction of the half Laplacian", eig < 1e-10, f"defect {eig:.2e}")

    # PV quadrature against the closed form (1-x^2)/(1+x^2)^2 at x = 0
    pv = nf.frac_laplacian_pv(lambda y: 1.0 / (1.0 + y * y), 1.0, 0.0, 1e-2, 200.0, 1e-4)
    check("PV quadrature of the Lorentzian", abs(pv - 1.0) < 1e-3, f"value {pv:.6f}")

    # golden-ratio Nehari projection: normalize a bump so that
    # ||u||^2 = G = P = 1, then t* = (1 + sqrt(5))/2
    grid = nf.TorusGrid(1, 10, 32)
    xs = [p[0] for p in grid.points()]
    bump = nf.Field(grid, [math.exp(-((x - 5.0) ** 2) / 2.0) for x in xs])
    unit = nf.Problem(grid, 2.0, "const:1", "zero", "power:p=4", 3.0)
    u = bump.scale(1.0 / nf.norm_e(unit, bump))
    g_sum = nf.lp_norm(u, 3.0) ** 3
    p_sum = nf.lp_norm(u, 4.0) ** 4
    prob = nf.Problem(
        grid,
        2.0,
        "const:1",
        f"const:{1.0 / g_sum}",
        f"power:p=4,b_base={1.0 / p_sum}",
        3.0,
    )
    t_star, j_at_t, _ = nf.project(prob, u)
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    check(
        "golden-ratio fiber maximizer",
        abs(t_star - golden) < 1e-9,
        f"t* = {t_star:.12f}",
    )
    check("fiber energy is positive", j_at_t > 0.0, f"J = {j_at_t:.6f}")

    # ground state of the cubic problem: J = 4/3, profile sqrt(2)*sech
    grid = nf.TorusGrid(1, 40, 64)
    xs = [p[0] for p in grid.points()]
    prob = nf.Problem(grid, 2.0, "const:1", "zero", "power:p=4", 3.0)
    check("model certification", prob.certified())
    start = nf.Field(grid, [math.exp(-((x - 17.3) ** 2)) for x in xs])
    report = nf.minimize(prob, start)
    check(
        "descent converges to the soliton level",
        report.converged and abs(report.j_final - 4.0 / 3.0) < 1e-3,
        f"J = {report.j_final:.8f} in {report.iterations} iterations",
    )
    check(
        "residual below tolerance",
        report.residual_final < 1e-6,
        f"residual {report.residual_final:.2e}",
    )

    # translation-orbit distance: a translate is the same orbit member
    sol = report.solution()
    shifted = nf.translate(sol, [11])
    dist = nf.orbit_distance(prob, sol, shifted)
    check("translate sits on the same orbit", dist < 1e-8, f"distance {dist:.2e}")

    # energy components compose: J = kinetic + potential - I
    kin, pot, f_term, g_term, i_term, j = nf.eval_j(prob, sol)
    check(
        "energy breakdown identity",
        abs(j - (kin + pot - i_term)) < 1e-12 and abs(i_term - (f_term - g_term)) < 1e-12,
    )

    # certification suite on a small periodic problem
    grid = nf.TorusGrid(1, 6, 16)
    small = nf.Problem(grid, 1.5, "periodic:base=2,amp=1", "const:1", "power:p=4", 3.0)
    results = nf.run_verification(small, seed=1)
    failed = [name for name, status, _ in results if status == "fail"]
    check(
        f"verification suite ({len(results)} checks)",
        not failed,
        f"failures: {failed}" if failed else "all pass/skip",
    )

    print("smoke test passed")


if __name__ == "__main__":
    main()
