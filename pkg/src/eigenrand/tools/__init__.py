"""Run tracking and Monte Carlo plumbing shared by the experiment modules."""
