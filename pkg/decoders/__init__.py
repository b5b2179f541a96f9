"""
Decoders - flag-aware lookup tables, the teleportation split decoder and the brute-force ML oracle

Table construction (``decoders.builder``), fault enumeration
(``decoders.fault_enum``) and DEM export (``decoders.dem``) sit on top of
the executor and are imported from their modules directly.
"""

from decoders.brute_force import brute_force_ml_decode
from decoders.lookup import (
    FlagContext,
    LookupTable,
    decode_lookup,
    load_lookup_table,
    syndrome_key,
    published_table,
    tables_equivalent,
)
from decoders.split import SplitDecoder

__all__ = [
    "FlagContext",
    "LookupTable",
    "SplitDecoder",
    "brute_force_ml_decode",
    "decode_lookup",
    "load_lookup_table",
    "syndrome_key",
    "published_table",
    "tables_equivalent",
]
