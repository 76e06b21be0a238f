"""Main entry point for the Chewing SSL package.

Allows running the application directly with `python -m chewing_ssl`.
"""

import sys

from chewing_ssl.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
