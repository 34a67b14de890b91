"""qre — quantum resource estimator for modular surface-code architectures.

Compiles widgetized logical circuits to graph states, schedules their
lattice-surgery preparation and measurement-based consumption onto a modular
superconducting architecture, solves for the minimal code distance and
T-factory, and reports space, time, power, and energy requirements.
"""

__version__ = "0.1.0"
