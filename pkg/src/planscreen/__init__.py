"""Plan-screening laboratory for long-horizon manipulation plans."""

__version__ = "0.1.0"
