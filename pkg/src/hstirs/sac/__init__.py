"""Soft actor-critic written directly in numpy."""
from .agent import SacAgent, SacConfig, load_agent, save_agent, sample_action, update
from .network import Mlp, backward, forward
from .replay import ReplayBuffer
from .trainer import TrainResult, read_curves, train, write_curves

__all__ = [
    "Mlp", "ReplayBuffer", "SacAgent", "SacConfig", "TrainResult", "backward", "forward",
    "load_agent", "read_curves", "sample_action", "save_agent", "train", "update", "write_curves",
]
