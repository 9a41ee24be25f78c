"""Asymmetric Orlicz zonotopes: support functions, volumes, polars and
numerical checks of their volume-product and volume-ratio inequalities."""

from .body import SupportOracle, VolumeBounds, build_sandwich, santalo_point, volume_bounds
from .harness import ExperimentConfig, Verdict, run, volume_product, volume_ratio
from .multisets import VectorMultiset, canonical_basis
from .norm import orlicz_norm
from .phi import OrliczFunction, identity, make_phi, mix, power, pwl
from .shadow import ShadowSystem, orthogonalize
from .zonotope import OrliczZonotope, l1_volume

__all__ = [
    "ExperimentConfig",
    "OrliczFunction",
    "OrliczZonotope",
    "ShadowSystem",
    "SupportOracle",
    "VectorMultiset",
    "Verdict",
    "VolumeBounds",
    "build_sandwich",
    "canonical_basis",
    "identity",
    "l1_volume",
    "make_phi",
    "mix",
    "orlicz_norm",
    "orthogonalize",
    "power",
    "pwl",
    "run",
    "santalo_point",
    "volume_bounds",
    "volume_product",
    "volume_ratio",
]
