"""``python -m hpcforge``."""

import sys

from .cli import main

sys.exit(main())
