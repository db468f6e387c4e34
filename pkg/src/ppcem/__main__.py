import sys

from ppcem.cli import main

sys.exit(main())
