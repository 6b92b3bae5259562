"""Synthetic residential energy data: behaviour clustering, adversarial
profile generators and Markov day-sequencing for PV, load and EV profiles."""

__version__ = "0.1.0"

from .common import ConfigError, DataError, MissingArtifactError  # noqa: F401
