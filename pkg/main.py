"""brlab command-line entry point"""
import sys

from brlab.cli.app import main

if __name__ == "__main__":
    sys.exit(main())
