#!/usr/bin/env python3
"""
OrliczLab Runner - runs the command line from a source checkout

    python run.py orlicz conjugate --family power --p 2 --s 1
"""

import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
