"""Error detection with the [[4,2,2]] code on five-qubit chips: circuits, simulators,
fault-tolerance verification, noisy sampling experiments and bare-circuit synthesis."""

__version__ = "0.1.0"
