"""Geflochtener: optimal-parsing DEFLATE compression with gzip/zlib output."""

from .inflate import InflateError, decompress, gunzip, inflate
from .lz_store import Token, TokenStore, expand
from .parsers import greedy_parse, iterate_optimal, shortest_path_parse
from .pipeline import CompressConfig, compress, compress_result

__all__ = [
    "CompressConfig",
    "InflateError",
    "Token",
    "TokenStore",
    "compress",
    "compress_result",
    "decompress",
    "expand",
    "greedy_parse",
    "gunzip",
    "inflate",
    "iterate_optimal",
    "shortest_path_parse",
]
__version__ = "0.1.0"
