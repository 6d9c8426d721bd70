"""KDE-AIS: kernel density adaptive importance sampling for rare-event failure probabilities."""

__version__ = "0.1.0"
