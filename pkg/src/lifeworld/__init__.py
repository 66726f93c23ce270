"""Composable discrete control problems for kitchen-style worlds."""

from .env import DCP, Action, Domain, Environment, Policy, run_policy, solvable, solves, synthesize_policy
from .products import parallel_product, serial_product

__version__ = "0.1.0"
