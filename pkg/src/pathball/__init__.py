"""Step-path group numerics with ball-measure invariance experiments."""

__all__ = ["lie_core", "path_space", "path_group", "sampling", "transport",
           "config", "experiments"]
