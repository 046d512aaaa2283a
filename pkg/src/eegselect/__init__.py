"""Compact EEG channel subsets for motor imagery via two-objective search.

Selects channel subsets that trade off spatial proximity to the sensorimotor
references (C3/C4) against per-trial band-power desynchronisation, using
NSGA-II, MOPSO and MOEA/D over binary channel masks, and validates subsets
with a filter-bank CSP + statistical-feature + mRMR + linear-margin
classification pipeline. A greedy accuracy-driven selector serves as the
domain-agnostic baseline.
"""

__version__ = "0.1.0"
