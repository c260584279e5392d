"""Optimization heuristics expressed as discrete-time spiking networks."""

__version__ = "0.1.0"

from .core import (
    Network,
    NeuronKind,
    NeuronParams,
    NeuronState,
    NoiseSchedule,
    SpikeTrace,
    Synapse,
    readout_state,
    run,
    step,
)
