"""Simulation harness: density models, Monte Carlo risk, rate sweeps, bias checks."""
