"""Commands module."""

from commands import ablate, evaluate, flow_vis, interpolate, train

COMMANDS = (interpolate, train, evaluate, ablate, flow_vis)

__all__ = ["COMMANDS", "ablate", "evaluate", "flow_vis", "interpolate", "train"]
