"""Workbench for quantum-memory-assisted state verification strategies.

Subpackages cover dense quantum linear algebra (qcore), graph states and
their parity codes (graphs), single- and two-copy verification strategies
(strategy, graph_strategy), tensor-power and dimension-expansion families
(ghz), Monte Carlo protocol simulation and worst-case search (montecarlo),
and a batch command line front end (cli).
"""

__version__ = "0.1.0"
