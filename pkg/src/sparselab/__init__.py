"""Sparsely activated regression models with locality-sensitive routing.

Library layout:

- ``rng``       deterministic counter-based PRNG used for every random draw
- ``lsh``       Euclidean lattice / sign-pattern hash families, bucket tables
- ``targets``   synthetic regression targets with exact evaluators
- ``models``    dense baseline, masked sparse models, LSH bucket learners
- ``training``  top-layer training (GD / SGD / RMSProp) and oracles
- ``metrics``   activated-unit and FLOP accounting, results CSV schema
- ``sweep``     deterministic experiment grids
- ``charts``    dependency-free SVG line charts plus PNG rendering
- ``cli``       the ``sparselab`` command line harness
"""

__version__ = "0.1.0"
