"""
kmn-curvature-verifier

Numerical verification engine for the curvature theory of
(kappa,mu,nu)-contact metric manifolds and generalized
(kappa,mu,nu)-space forms.
"""

__version__ = "0.1.0"
