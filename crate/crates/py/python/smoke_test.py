# SPDX-License-Identifier: Apache-2.0
"""Smoke test for the diffpath_py extension.

Build and install with `maturin develop --release -m crates/py/Cargo.toml`,
or point PYTHONPATH at a directory holding the built module.
"""

import math

import diffpath_py as dp


def main():
    exp = dp.TransmissionModel("exp")
    assert math.isclose(exp.log_survival(0.0, 2.0, 0.5), -1.0)
    assert math.isclose(exp.density(0.0, 1.0, 1.0), math.exp(-1.0))
    try:
        dp.TransmissionModel("pow")
    except ValueError:
        pass
    else:
        raise AssertionError("power law without delta must fail")

    c = dp.Cascade("c0", 0.0, 3.0, [(0, 0.0), (1, 1.0)])
    rates = {(0, 1): 1.0, (0, 2): 0.5}
    nll = dp.cascade_neg_log_likelihood(c, rates, exp)
    assert math.isclose(nll, 1.0 + 0.5 * 3.0)
    grad = dp.cascade_gradient(c, rates, exp)
    assert (0, 1) not in grad  # stationary: zero entries are omitted
    assert math.isclose(grad[(0, 2)], 3.0)

    edges = dp.generate_kronecker([[0.9, 0.5], [0.5, 0.3]], 5, 60, rng_seed=1)
    truth = dp.assign_patterns(32, edges, horizon=10.0, rng_seed=1)
    cascades = dp.simulate_cascades(truth, exp, 12, 60, 2.0, rng_seed=2)
    assert len(cascades) == 12 * 60

    config = dp.InferenceConfig(epsilon=0.05, gamma0=0.05, init_rate=0.5, sample_window=3.0, iterations=300)
    series = dp.infer_dynamic(cascades, 0.0, 12.0, config)
    assert [t for t, _ in series] == [float(t) for t in range(12)]
    t, last = series[-1]
    true_last = truth.rates_at(t)
    p, r = dp.precision_recall(last, true_last)
    print(f"step {t}: {len(last)} edges, precision {p:.2f}, recall {r:.2f}, "
          f"accuracy {dp.accuracy(last, true_last):.2f}")
    assert 0.0 <= p <= 1.0 and 0.0 <= r <= 1.0

    static = dp.infer_static(cascades[:200], config, max_epochs=2)
    assert all(v > config.epsilon for v in static.values())
    assert len(dp.harmonic_centrality(last, 32)) == 32
    print("smoke test passed")


if __name__ == "__main__":
    main()
