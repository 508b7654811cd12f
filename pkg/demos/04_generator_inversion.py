#!/usr/bin/env python3
"""Estimating demands by searching a generator's latent space.

A trained generator maps a low-dimensional Gaussian latent vector to a
plausible demand vector. Estimation then minimizes ||b - A T(z)||^2 over
the latent z: try a batch of random starts, keep the best, and descend
with Adam on the exact gradient through the network.

This demo uses the small checked-in fixture generators; train real ones
with the separate trainer package (see trainer/README.md).
"""

import os

import numpy as np

from tmest import (
    GanEstimateConfig,
    gan_estimate,
    generator_forward,
    load_generator,
    make_rng,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")

# A linear generator makes the search convex, so we can verify optimality.
net = load_generator(os.path.join(FIXTURES, "linear_generator.json"))
print(f"generator: latent_dim={net.latent_dim} output_dim={net.output_dim} "
      f"output_activation={net.output_activation}")

rng = make_rng(77)
m = 12
A = rng.standard_normal((m, net.output_dim)) / np.sqrt(net.output_dim)
b = rng.standard_normal(m)

AW = net.scale_mbps * (A @ net.layers[0][0])
z_opt = np.linalg.lstsq(AW, b, rcond=None)[0]
opt_loss = float(np.sum((b - AW @ z_opt) ** 2))

est, diag = gan_estimate(net, A, b, GanEstimateConfig(inits=100, steps=4000, seed=5))
print(f"\nbest random start loss: {diag.init_loss:.6f}")
print(f"loss after Adam:        {diag.best_loss:.6f}")
print(f"least-squares optimum:  {opt_loss:.6f}")
print(f"gap to optimum:         {diag.best_loss / opt_loss - 1:.2%}")

# The ReLU fixture behaves like a trained generator: outputs are demands >= 0.
relu_net = load_generator(os.path.join(FIXTURES, "relu_generator.json"))
x = generator_forward(relu_net, make_rng(1).standard_normal(relu_net.latent_dim))
print(f"\nReLU generator sample (Mbps): min={x.min():.1f} max={x.max():.1f}")

A2 = np.abs(make_rng(2).standard_normal((8, relu_net.output_dim)))
truth = generator_forward(relu_net, make_rng(3).standard_normal(relu_net.latent_dim))
b2 = A2 @ truth
est2, diag2 = gan_estimate(relu_net, A2, b2, GanEstimateConfig(inits=200, steps=3000, seed=9))
rel = np.linalg.norm(A2 @ est2.values - b2) / np.linalg.norm(b2)
print(f"in-range target: relative load residual after inversion = {rel:.2e}")
