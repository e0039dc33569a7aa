"""Smoke test for the helmpml Python extension.

Run after `maturin develop -m crates/python/Cargo.toml`, or after
`cargo build --release -p helmpml-python --features extension-module`
(the script then loads target/release/libhelmpml.so directly).
"""

import cmath
import importlib.util
import math
import pathlib
import sys
import tempfile


def load():
    try:
        import helmpml

        return helmpml
    except ImportError:
        root = pathlib.Path(__file__).resolve().parents[1]
        for name in ("libhelmpml.so", "libhelmpml.dylib", "helmpml.dll"):
            lib = root / "target" / "release" / name
            if lib.exists():
                spec = importlib.util.spec_from_file_location("helmpml", lib)
                mod = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(mod)
                return mod
        sys.exit("helmpml extension not found; build it first")


def main():
    hp = load()

    # Wronskian and H = J + iY
    x = 2.5
    w = hp.bessel_j(1, x) * hp.bessel_y(0, x) - hp.bessel_j(0, x) * hp.bessel_y(1, x)
    assert abs(w - 2 / (math.pi * x)) < 1e-14, w
    assert abs(hp.hankel1(0, x) - complex(hp.bessel_j(0, x), hp.bessel_y(0, x))) < 1e-15

    assert abs(hp.penalty_gamma(0.0).real + math.sqrt(3) / 24) < 1e-15

    p = hp.PmlParams(4.0)
    alpha, beta = p.alpha_beta(0.5)
    assert alpha == 1 and beta == 1
    try:
        hp.PmlParams(-1.0)
        raise AssertionError("negative k accepted")
    except ValueError:
        pass

    mesh = hp.Mesh.disk(0.125)
    mesh.validate()
    assert mesh.h_max <= 0.125
    nodal, residual = hp.solve(mesh, p)
    assert len(nodal) == mesh.num_vertices and residual < 1e-10
    rel_l2, rel_h1 = hp.disk_errors(mesh, nodal, 4.0)
    assert rel_l2 < 0.05 and rel_h1 < 0.3, (rel_l2, rel_h1)

    gamma = hp.penalty_gamma(4.0 * mesh.h_max)
    nodal_cip, _ = hp.solve(mesh, p, gamma)
    assert nodal_cip != nodal

    u_in, _ = hp.exact_disk(4.0, 0.3)
    u_out, _ = hp.exact_disk(4.0, 1.7)
    assert cmath.isfinite(u_in) and cmath.isfinite(u_out)

    r, u = hp.radial_reference(p, 4000)
    assert len(r) == len(u) and r[0] == 0.0 and abs(u[-1]) == 0.0

    left, mid, right = hp.pml_1d_exact(hp.PmlParams(3.0), [-1.5, 0.0, 1.5])
    assert abs(left - right) < 1e-14 and abs(left) < abs(mid)

    with tempfile.TemporaryDirectory() as d:
        rows = hp.run_study("study = stability\nk = 4, 8\nradial_cells = 4000\n", d)
        assert rows == 2
        assert (pathlib.Path(d) / "study.csv").exists()

    print(f"smoke test ok: N={mesh.num_vertices} rel_l2={rel_l2:.3e} rel_h1={rel_h1:.3e}")


if __name__ == "__main__":
    main()
