"""One-level overlapping Schwarz (SORAS/ORAS) preconditioners for
reaction-convection-diffusion, with the linear-algebra diagnostics needed to
check the GMRES convergence bounds numerically."""

__version__ = "0.1.0"
