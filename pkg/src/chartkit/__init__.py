"""Chart-grounding toolkit: dataset construction, reward scoring, evaluation."""

__version__ = "0.1.0"
