"""Smoke test for the qcoin extension module.

Build and install first, e.g. ``pip install ./crates/py`` (maturin backend).
"""

import math

import qcoin


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    quarter = math.pi / 4

    ps = qcoin.ProtocolStates(quarter)
    close(ps.overlap(), math.cos(quarter) ** 2, 1e-12)
    close(ps.helstrom_success(), 0.5 * (1 + math.sin(quarter)), 1e-12)
    close(ps.unambiguous_success(), 1 - math.cos(quarter), 1e-12)

    rho = ps.state(0).depolarize(0.9)
    close(rho.fidelity(ps.state(0)), 0.95, 1e-12)
    close(rho.trace_distance(qcoin.QubitState.maximally_mixed()), 0.45, 1e-12)
    try:
        qcoin.QubitState(1.0, 1.0, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("state outside the Bloch ball accepted")

    eps, sol = qcoin.optimal_alice_bias(0.9, quarter)
    close(eps, 0.17981, 1e-5)
    assert sol.regime == "highF"
    assert sol.mixture_residual() <= 1e-10
    close(qcoin.f_star(quarter), 0.8740, 1e-4)
    close(qcoin.theorem1_bound(0.005, math.pi / 2), 0.1, 1e-12)

    oracle = qcoin.oracle_alice_bias(0.5, quarter)
    close(oracle["q"] - 0.5, 0.32322, 1e-3)

    report = qcoin.bias_report(0.9, quarter)
    assert report["regime"] == "highF"

    config = {
        "params": {"theta": quarter, "f": 0.9, "n": 20000},
        "alice": {"kind": "cheat_optimal"},
        "runs": 8,
        "master_seed": 1,
    }
    sim = qcoin.run_experiment(config, threads=2)
    assert sim["avg_bias"]["ci_low"] <= eps <= sim["avg_bias"]["ci_high"], sim["avg_bias"]
    assert sim == qcoin.run_experiment(config, threads=1)

    rows = qcoin.sweep("f", [0.0, 0.5, 2.0], config, theory_only=True)
    close(rows[1]["eps_A_closed"], 0.32322, 1e-5)
    assert rows[2]["error"] is not None

    results = qcoin.acceptance(ids=[2, 3, 4, 5])
    assert all(r["passed"] for r in results), results

    print("qcoin smoke test passed")


if __name__ == "__main__":
    main()
