"""Rubric-based evaluation harness for LLM judges.

Thin wrapper over the C++ core. Structured arguments and results cross the
boundary as JSON strings using the same schemas as the on-disk artifacts
(dataset files, judges configs, items.jsonl, metrics.json).
"""

try:
    from ._core import *  # noqa: F401,F403  (installed package layout)
    from ._core import __version__  # noqa: F401
except ImportError:
    # In-tree builds put the extension on PYTHONPATH next to this package.
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
