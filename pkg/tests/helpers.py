"""Shared builders for randomized property tests."""

import numpy as np

from rnnelm.rnn import ClusterParams, RnnNetwork


def random_valid_params(rng):
    """Cluster parameter draws that admit a probability root for every
    inhibition input x >= 0."""
    n = int(rng.integers(2, 30))
    p = float(rng.uniform(0.01, 0.95))
    r = float(rng.uniform(0.1, 5.0))
    lm = float(rng.uniform(0.0, 2.0))
    m = (n - 1) * p
    # keep lambda+ below both the constructor bound and the all-input
    # stability threshold so every x >= 0 is admissible
    cap = min(r + lm, lm + r * (1 + m) / (n - m))
    lp = float(rng.uniform(0.0, 0.95 * cap))
    return ClusterParams(n=n, p=p, r=r, lambda_plus=lp, lambda_minus=lm)


def make_network(size, w_plus, w_minus, ext_plus, ext_minus, rates):
    return RnnNetwork(
        size=size,
        w_plus=np.asarray(w_plus, dtype=np.float64),
        w_minus=np.asarray(w_minus, dtype=np.float64),
        ext_plus=np.asarray(ext_plus, dtype=np.float64),
        ext_minus=np.asarray(ext_minus, dtype=np.float64),
        rates=np.asarray(rates, dtype=np.float64),
    )


def two_neuron_chain():
    """Neuron 0 (ext 1, rate 2) excites neuron 1 (w+ = 2, rate 4)."""
    return make_network(
        2,
        [[0.0, 2.0], [0.0, 0.0]],
        [[0.0, 0.0], [0.0, 0.0]],
        [1.0, 0.0],
        [0.0, 0.0],
        [2.0, 4.0],
    )


def random_stable_network(rng, size=5):
    rates = rng.uniform(1.0, 4.0, size)
    w_plus = rng.uniform(0.0, 0.2, (size, size))
    w_minus = rng.uniform(0.0, 0.2, (size, size))
    np.fill_diagonal(w_plus, 0.0)
    np.fill_diagonal(w_minus, 0.0)
    # scale so spike routing probabilities sum below 1
    total = (w_plus + w_minus).sum(axis=1)
    factor = np.minimum(1.0, 0.9 * rates / np.maximum(total, 1e-12))[:, None]
    return RnnNetwork(
        size=size,
        w_plus=w_plus * factor,
        w_minus=w_minus * factor,
        ext_plus=rng.uniform(0.05, 0.5, size),
        ext_minus=rng.uniform(0.0, 0.3, size),
        rates=rates,
    )
