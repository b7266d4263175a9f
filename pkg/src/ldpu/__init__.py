"""Utility quantification for classifiers fed LDP-perturbed inputs."""

__version__ = "0.1.0"
