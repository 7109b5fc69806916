"""fedlake: privacy-preserving federated analytics over hospital data nodes.

A coordinator holding a global schema catalog decomposes analytical
queries across autonomous data nodes and aggregates the results, and
orchestrates federated averaging of clinical prediction models; raw rows
never leave a node for prediction workloads.
"""

__version__ = "0.1.0"
