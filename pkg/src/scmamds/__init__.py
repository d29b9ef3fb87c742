"""SCMA codebook design from MDS block codes, with an LNCP log-MPA link simulator."""

__version__ = "0.1.0"
