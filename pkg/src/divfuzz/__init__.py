"""Generator-based fuzzing over split structural/value parameter sequences,
with Hill-number measures of behavioral diversity."""

__version__ = "0.1.0"
