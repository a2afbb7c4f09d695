#!/usr/bin/env python3
"""
robnet launcher

Runs the robnet command line from a checkout without installing it.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

if __name__ == "__main__":
    try:
        from src.cli import cli
    except ImportError as e:
        print(f"Error: Failed to import required modules: {e}")
        print("\nPlease make sure all dependencies are installed:")
        print("  pip install -r requirements.txt")
        sys.exit(1)
    cli()
