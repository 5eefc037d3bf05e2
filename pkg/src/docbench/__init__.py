"""docbench: document-store loading backends and a data-loading benchmark.

Three interchangeable backends (in-memory dict, offset-indexed flat file,
LZ4-compressed store with a memory-mapped sorted index) behind one
get-by-id contract, plus a training-loop harness that measures their
throughput and memory footprint under thread- and process-parallel
consumers.
"""

__version__ = "0.1.0"

from .corpus import DocRecord, QueryRecord, TripleSpec
from .harness import BenchConfig, run_bench
from .store import open_compressed, open_in_memory, open_indexed, open_store

__all__ = [
    "DocRecord",
    "QueryRecord",
    "TripleSpec",
    "BenchConfig",
    "run_bench",
    "open_in_memory",
    "open_indexed",
    "open_compressed",
    "open_store",
    "__version__",
]
