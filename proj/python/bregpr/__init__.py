"""Phase recovery with beta-divergences for audio source separation."""

from ._core import (
    DivergedError,
    DivergenceSpec,
    Direction,
    Error,
    StftConfig,
    amplitude_mask_init,
    bregman,
    grad_j,
    griffin_lim,
    istft,
    load_wav,
    magnitude_power,
    make_window,
    misi,
    mix_at_snr,
    normalization_constant,
    objective,
    project_to_mixture,
    projected_gradient,
    psi,
    psi_prime,
    psi_second,
    sdr,
    sdri,
    stft,
    write_wav,
    z_term,
)

__all__ = [
    "DivergedError",
    "DivergenceSpec",
    "Direction",
    "Error",
    "StftConfig",
    "amplitude_mask_init",
    "bregman",
    "grad_j",
    "griffin_lim",
    "istft",
    "load_wav",
    "magnitude_power",
    "make_window",
    "misi",
    "mix_at_snr",
    "normalization_constant",
    "objective",
    "project_to_mixture",
    "projected_gradient",
    "psi",
    "psi_prime",
    "psi_second",
    "sdr",
    "sdri",
    "stft",
    "write_wav",
    "z_term",
]
