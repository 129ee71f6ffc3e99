"""Quantum secret sharing lab: fields, access structures, a state-vector
simulator, classical and quantum sharing schemes, and the compiler that
combines them."""

__version__ = "0.1.0"
