"""Deterministic ledger for tokenized real-estate rights.

A single-node system: stakeholders register with an identity registry,
property documents live in a content-addressed store and are committed
as merkle roots, properties deploy through a factory as multi-token
contracts (one NFT per right, optional fractional supply per right),
and every successful command is sealed into a hash-chained block log.
"""

from .errors import LedgerError

__all__ = ["LedgerError"]
__version__ = "0.1.0"
