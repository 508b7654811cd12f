"""WGAN-GP training loop and weight export.

The generator maps Gaussian latents to normalized demand vectors through
fully connected ReLU layers (ReLU output keeps demands nonnegative). The
critic scores demand vectors; it is trained with the gradient-penalty
Wasserstein loss

    L_critic = E[D(fake)] - E[D(real)] + gp * E[(||grad D(interp)||_2 - 1)^2]
    L_gen    = -E[D(fake)]

with uniform per-sample interpolation between real and fake batches, and is
updated `critic_steps_per_gen` times per generator step. Training data is
normalized by its maximum demand; that constant is stored in the exported
weight file as `scale_mbps` so the estimator can map outputs back to Mbps.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from .data import DataEmpty

log = logging.getLogger(__name__)


class NonFiniteLoss(Exception):
    """Training diverged: a loss or penalty became non-finite."""


@dataclass
class TrainConfig:
    epochs: int = 300
    critic_steps_per_gen: int = 64
    generator_hidden: tuple[int, ...] = (32, 64, 128)
    critic_hidden: tuple[int, ...] = (512, 256, 256, 256)
    gradient_penalty: float = 10.0
    batch_size: int = 64
    latent_dim: int = 64
    learning_rate: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.9
    seed: int = 0
    synthetic_tms: int = 1024  # dataset size when drawing synthetic TMs

    def __post_init__(self):
        counts = (
            self.epochs,
            self.critic_steps_per_gen,
            self.batch_size,
            self.latent_dim,
            self.synthetic_tms,
            *self.generator_hidden,
            *self.critic_hidden,
        )
        if any(c < 1 for c in counts):
            raise ValueError("all counts must be >= 1")
        if not self.gradient_penalty > 0:
            raise ValueError("gradient penalty coefficient must be positive")


def build_generator(latent_dim: int, hidden: tuple[int, ...], p: int) -> nn.Sequential:
    sizes = [latent_dim, *hidden, p]
    layers: list[nn.Module] = []
    for k in range(len(sizes) - 1):
        layers.append(nn.Linear(sizes[k], sizes[k + 1]))
        layers.append(nn.ReLU())
    return nn.Sequential(*layers)


def build_critic(p: int, hidden: tuple[int, ...]) -> nn.Sequential:
    sizes = [p, *hidden]
    layers: list[nn.Module] = []
    for k in range(len(sizes) - 1):
        layers.append(nn.Linear(sizes[k], sizes[k + 1]))
        layers.append(nn.ReLU())
    layers.append(nn.Linear(sizes[-1], 1))
    return nn.Sequential(*layers)


@dataclass
class TrainedGenerator:
    model: nn.Sequential
    latent_dim: int
    output_dim: int
    scale_mbps: float
    history: list[dict] = field(default_factory=list)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n generated demand vectors (Mbps), rows independent."""
        z = torch.from_numpy(rng.standard_normal((n, self.latent_dim))).float()
        with torch.no_grad():
            out = self.model(z).numpy().astype(float)
        return self.scale_mbps * out


def _gradient_penalty(critic, real: torch.Tensor, fake: torch.Tensor) -> torch.Tensor:
    eps = torch.rand(real.shape[0], 1, dtype=real.dtype)
    interp = (eps * real + (1.0 - eps) * fake).requires_grad_(True)
    scores = critic(interp)
    grads = torch.autograd.grad(
        outputs=scores.sum(), inputs=interp, create_graph=True
    )[0]
    norms = grads.norm(2, dim=1)
    return ((norms - 1.0) ** 2).mean()


def train_generator(config: TrainConfig, data: np.ndarray) -> TrainedGenerator:
    """Train a generator on an (n_tms, p) demand array (Mbps)."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] == 0:
        raise DataEmpty("training data must be a nonempty (n_tms, p) array")
    scale = float(data.max())
    if not scale > 0:
        raise DataEmpty("training data has no positive demands")
    p = data.shape[1]

    torch.manual_seed(config.seed)
    real_all = torch.from_numpy(data / scale).float()
    generator = build_generator(config.latent_dim, config.generator_hidden, p)
    critic = build_critic(p, config.critic_hidden)
    opt_g = torch.optim.Adam(
        generator.parameters(), lr=config.learning_rate, betas=(config.beta1, config.beta2)
    )
    opt_c = torch.optim.Adam(
        critic.parameters(), lr=config.learning_rate, betas=(config.beta1, config.beta2)
    )

    trained = TrainedGenerator(
        model=generator, latent_dim=config.latent_dim, output_dim=p, scale_mbps=scale
    )
    n = real_all.shape[0]
    critic_steps = 0
    gen_steps = 0
    for epoch in range(config.epochs):
        perm = torch.randperm(n)
        critic_losses = []
        gen_losses = []
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            real = real_all[idx]
            z = torch.randn(real.shape[0], config.latent_dim)
            fake = generator(z).detach()

            opt_c.zero_grad()
            loss_c = (
                critic(fake).mean()
                - critic(real).mean()
                + config.gradient_penalty * _gradient_penalty(critic, real, fake)
            )
            if not torch.isfinite(loss_c):
                raise NonFiniteLoss(f"critic loss diverged at epoch {epoch}")
            loss_c.backward()
            opt_c.step()
            critic_losses.append(float(loss_c.detach()))
            critic_steps += 1

            if critic_steps % config.critic_steps_per_gen == 0:
                opt_g.zero_grad()
                z = torch.randn(real.shape[0], config.latent_dim)
                loss_g = -critic(generator(z)).mean()
                if not torch.isfinite(loss_g):
                    raise NonFiniteLoss(f"generator loss diverged at epoch {epoch}")
                loss_g.backward()
                opt_g.step()
                gen_losses.append(float(loss_g.detach()))
                gen_steps += 1

        entry = {
            "epoch": epoch,
            "critic_loss": float(np.mean(critic_losses)) if critic_losses else None,
            "generator_loss": float(np.mean(gen_losses)) if gen_losses else None,
            "generator_steps": gen_steps,
        }
        trained.history.append(entry)
        log.info(
            "epoch %d: critic %.4f generator %s (gen steps %d)",
            epoch,
            entry["critic_loss"],
            f"{entry['generator_loss']:.4f}" if entry["generator_loss"] is not None else "-",
            gen_steps,
        )
    return trained


def export_weights(trained: TrainedGenerator, path, metadata: dict | None = None) -> None:
    """Write the generator in the estimator's weight interchange format."""
    linears = [m for m in trained.model if isinstance(m, nn.Linear)]
    layers = []
    for lin in linears:
        W = lin.weight.detach().double().numpy()
        bias = lin.bias.detach().double().numpy()
        layers.append(
            {
                "rows": int(W.shape[0]),
                "cols": int(W.shape[1]),
                "weights": [float(w) for w in W.ravel()],
                "bias": [float(x) for x in bias],
            }
        )
    doc = {
        "format_version": 1,
        "latent_dim": trained.latent_dim,
        "output_dim": trained.output_dim,
        "scale_mbps": float(trained.scale_mbps),
        "hidden_activation": "relu",
        "output_activation": "relu",
        "layers": layers,
    }
    if metadata:
        doc["metadata"] = metadata
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def forward_reference(trained: TrainedGenerator, z: np.ndarray) -> np.ndarray:
    """Double-precision forward pass for interchange verification."""
    model = trained.model.double()
    with torch.no_grad():
        out = model(torch.from_numpy(np.asarray(z, dtype=float))).numpy()
    trained.model.float()
    return trained.scale_mbps * out
