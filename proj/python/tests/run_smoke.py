"""ctest entry point: skip (77) when the extension is not installed."""

import pathlib
import sys

try:
    import egan  # noqa: F401
except ImportError as exc:
    print(f"egan python module not installed: {exc}")
    sys.exit(77)

import pytest

sys.exit(pytest.main(["-q", str(pathlib.Path(__file__).parent)]))
