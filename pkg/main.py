"""Main entry point for the Poisson solver arena.

Example usage:
    python main.py run --solver fft --case osc:k=4 --n 16
    python main.py sweep --solver gmg --q 4 --case layer:alpha=10 --target 1e-3 --out gmg.csv
    python main.py table fft.csv fmm.csv gmg.csv --out table8
    python main.py fit fft.csv --column solve_seconds
"""

import os
import sys

from dotenv import load_dotenv

# Load ARENA_* settings from .env
load_dotenv()

# Add src to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.harness.cli import main

if __name__ == "__main__":
    sys.exit(main())
