"""Energy-seeking learning models: simulation library and batch experiment CLI.

Subsystems
----------
autoencoder   linear classical / parroting autoencoders and their training
collective    ensembles of parroting agents aligning on a shared percept
digital       reversible subtraction, the per-bit energy ledger, extraction
analog        driven damped oscillator, power flows, resonance diagnostics
tuner         noise-driven parameter search with a power-activated brake
resonet       random Kirchhoff RLC networks, modal spectra, drive response
experiments   validated experiment configs dispatched to the modules above
"""

__version__ = "0.1.0"
