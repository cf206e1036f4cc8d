"""seqrules: sequential pattern and rule mining over longitudinal event records."""

__version__ = "0.1.0"
