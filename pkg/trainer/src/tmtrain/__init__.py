"""Offline WGAN-GP training of demand-vector generators."""

from .data import DataEmpty, load_tm_csvs, sample_power_law_tms
from .wgan import NonFiniteLoss, TrainConfig, export_weights, train_generator

__version__ = "0.1.0"
