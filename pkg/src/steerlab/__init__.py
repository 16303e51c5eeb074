"""Steering-based certification of pure bipartite entangled states with one
untrusted measurement device.

Subpackages:
    qmath        dense complex linear algebra primitives
    assemblage   steering assemblages and their construction from states
    tsi          tilted steering inequality values and bounds
    certify      self-testing isometry and certification fidelities
    robust       noise models and robustness bounds
    steerweight  steerable weight via a self-contained SDP solver
    cli          command line interface
"""

__version__ = "0.1.0"
