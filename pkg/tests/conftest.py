import os
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SRC = os.path.join(ROOT, "src")

try:
    import adiakit  # noqa: F401
except ImportError:
    sys.path.insert(0, SRC)
