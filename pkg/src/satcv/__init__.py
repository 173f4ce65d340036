"""Continuous-variable quantum communication over satellite fading channels.

Submodules: ``gaussian`` (covariance-matrix toolbox), ``atmosphere``
(beam-wandering fading), ``fock`` (truncated Fock-space engine), ``qkd``
(key rates, post-selection, entanglement swapping) and ``cli``.
"""

__version__ = "0.1.0"
