"""Exhaustive-enumeration laboratory for No Free Lunch identities.

Subpackages cover the finite search model (:mod:`nfl_lab.core`), search
algorithms, the search-side identities (:mod:`nfl_lab.nfl`), supervised
learning (:mod:`nfl_lab.supervised`), cross-validated Monte Carlo
optimization (:mod:`nfl_lab.mco`) and the experiment runner (:mod:`nfl_lab.lab`).
"""

__version__ = "0.1.0"
