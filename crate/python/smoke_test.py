"""Smoke test for the exciton_trap_py extension.

Build and install first:

    cd crates/python && maturin develop --release
"""

import math
import sys

import exciton_trap_py as et


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    star = et.NetworkSpec("star", 4, 4, delta=math.sqrt(3))
    chain = et.NetworkSpec("chain", 4, 4, delta=math.sqrt(3))
    assert star.total_sites == 17 and chain.total_sites == 5
    assert close(star.optimal_defect, math.sqrt(3), 1e-12)
    assert et.NetworkSpec.from_config(star.to_config()) == star

    # without dephasing the two networks absorb identically
    t_star = et.absorption_time(star, 0.0, engine="full")
    t_chain = et.absorption_time(chain, 0.0, engine="full")
    assert close(t_star, t_chain, 1e-6), (t_star, t_chain)
    assert close(et.absorption_time(star, 0.05, engine="reduced"), et.absorption_time(star, 0.05, engine="full"), 1e-6)

    times, p = et.simulate(chain, 0.1, points=50)
    assert len(times) == len(p) == 50 and p[0] < 1e-12
    assert all(b >= a - 1e-12 for a, b in zip(p, p[1:]))

    ka, kb, kc = et.classical_rates(1.0, 1.0, 0.0, 0.1)
    assert close(ka, 2.0, 1e-15) and close(kb, 2.0, 1e-15)

    m = et.mfpt(et.NetworkSpec("star", 5, 4), 3.0)
    assert close(m["inverse"] / m["closed_form"], 1.0, 1e-9)
    assert close(m["wtd"] / m["closed_form"], 1.0, 1e-9)

    spectrum = et.liouvillian_spectrum(et.NetworkSpec("chain", 3, 2), 0.2)
    assert len(spectrum) == 9 and max(z.real for z in spectrum) <= 1e-10

    rows = et.sweep(et.NetworkSpec("star", 3, 3), [0.0, math.sqrt(2)], [0.0], with_speedup=True)
    assert [r["delta"] for r in rows] == [0.0, math.sqrt(2)] and rows[0]["engine"] == "reduced"
    assert close(et.critical_length(5), 12.5 / math.log(5), 1e-12)

    try:
        et.absorption_time(chain, 0.1, engine="reduced")
    except ValueError:
        pass
    else:
        raise AssertionError("reduced engine accepted a chain")

    print(f"tau(0) = {t_star:.4f}, S(0) = {et.speedup(star, 0.0):.4f}")
    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
