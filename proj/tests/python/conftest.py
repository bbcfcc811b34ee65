"""Lets the smoke tests run straight from a CMake build tree: if `flowmine`
is not importable, add <repo>/python and <repo>/build to sys.path."""

import os
import sys

try:
    import flowmine  # noqa: F401
except ImportError:
    root = os.path.dirname(os.path.dirname(os.path.dirname(
        os.path.abspath(__file__))))
    sys.path.insert(0, os.path.join(root, "python"))
    sys.path.insert(0, os.path.join(root, "build"))
