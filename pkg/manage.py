#!/usr/bin/env python
"""Command-line utility for the laguerre-cz verification suite."""

import sys


def main():
    """Run verify, sweep, kernel or apply."""
    try:
        from src.core.commands import main as run
    except ImportError as exc:
        raise ImportError(
            "Couldn't import laguerre-cz. Are numpy, scipy and pydantic installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
