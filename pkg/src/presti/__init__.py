"""Mining, measuring, and predicting the repayment effort of self-admitted technical debt."""

__version__ = "0.1.0"
