"""SyGuS-IF v1 toolkit: frontend, grammar engine, CEGIS solvers, checkers,
and a benchmark harness with competition-style reporting."""

__version__ = "0.1.0"
