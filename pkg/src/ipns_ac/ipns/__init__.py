"""Incentivizing plausible novel states: encoder, density/HVD, novelty scoring and intrinsic reward."""

from .autoencoder import Autoencoder, AutoencoderWarning, build_autoencoder, reconstruction_mse, train_autoencoder
from .density import (
    EncodedStateBuffer,
    HvdEstimate,
    HvdTracker,
    abs_densities,
    abs_density,
    abs_hvd,
    den_p,
    density,
    estimate_hvd,
    minibatch_size,
)
from .pipeline import ABLATION_MODES, IpnsConfig, IpnsPipeline
from .reward import IntrinsicReward, augment, intrinsic_reward, novelty, pn_score, zeta_from_gap

__all__ = [
    "ABLATION_MODES", "Autoencoder", "AutoencoderWarning", "EncodedStateBuffer", "HvdEstimate", "HvdTracker",
    "IntrinsicReward", "IpnsConfig", "IpnsPipeline", "abs_densities", "abs_density", "abs_hvd", "augment",
    "build_autoencoder", "den_p", "density", "estimate_hvd", "intrinsic_reward", "minibatch_size", "novelty",
    "pn_score", "reconstruction_mse", "train_autoencoder", "zeta_from_gap",
]
