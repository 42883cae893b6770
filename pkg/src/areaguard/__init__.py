"""Area-protection simulator and blocking-strategy toolkit.

Two teams move on a 4-connected grid: attackers race toward per-agent
target cells while defenders try to occupy targets or chokepoints first.
The package bundles the simulation engine, four defender allocation
strategies, scenario/map generators, an exact decision solver for micro
instances, and a QBF-to-instance reduction builder.
"""
from areaguard.grid import Cell, GridMap, parse_map, dump_map, load_map

__all__ = ["Cell", "GridMap", "parse_map", "dump_map", "load_map"]
__version__ = "0.1.0"
