"""Random neural network toolkit: steady-state solver, spiking simulator,
RNN image convolution and the gradient-free multi-layer RNN classifier."""

__version__ = "1.0.0"
