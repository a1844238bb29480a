"""Run the lattice-assoc command line without installing the package."""
import sys

from lattice_assoc.cli import main

if __name__ == "__main__":
    sys.exit(main())
