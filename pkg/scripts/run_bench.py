#!/usr/bin/env python3
"""Run the benchmark CLI from a checkout without installing."""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mla.bench import main

if __name__ == "__main__":
    sys.exit(main())
