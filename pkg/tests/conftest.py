"""Shared helpers for the test suite."""

import numpy as np

import spikemap as sm


def random_net(rng, n=None, gamma=None, coupling=1.5, i_ext_high=0.2, theta=1.0):
    """Random Gaussian-coupled network; coupling is the variance scale C."""
    if n is None:
        n = int(rng.integers(2, 7))
    if gamma is None:
        gamma = float(rng.uniform(0.1, 0.9))
    w = rng.normal(0.0, coupling / np.sqrt(n), (n, n))
    i_ext = rng.uniform(0.0, i_ext_high, n)
    return sm.NetworkParams(n=n, gamma=gamma, theta=theta, weights=w, i_ext=i_ext)


def batch_step(net, states):
    """Map applied to each row of states; independent of spikemap.step."""
    z = (states >= net.theta).astype(np.float64)
    return net.gamma * states * (1.0 - z) + z @ net.weights.T + net.i_ext


def example1_net():
    """One self-less neuron driven just below threshold: v(t) = 1 - 0.5^t from 0."""
    return sm.NetworkParams(n=1, gamma=0.5, theta=1.0, weights=[[0.0]], i_ext=[0.5])


def direct_sum_state(net, v0, raster, t):
    """Literal leak-weighted sum with explicit powers and survival products.

    Independent of the replay evaluation used by reconstruct: the initial
    term survives until the neuron's first spike, and each past current is
    weighted by the leak power times the survival product since then.
    """
    raster = np.asarray(raster)
    out = np.empty(net.n)
    for i in range(net.n):
        survive = 1.0
        for k in range(t):
            survive *= 1.0 - raster[k][i]
        acc = net.gamma ** t * survive * v0[i]
        for n in range(1, t + 1):
            survive = 1.0
            for k in range(n, t):
                survive *= 1.0 - raster[k][i]
            current = net.weights[i] @ raster[n - 1].astype(float) + net.i_ext[i]
            acc += net.gamma ** (t - n) * survive * current
        out[i] = acc
    return out
