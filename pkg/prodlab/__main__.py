"""Run the command line with: python -m prodlab ..."""

import sys

from prodlab.cli_app import main

sys.exit(main())
