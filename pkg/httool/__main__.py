import sys

from httool.cli import main

sys.exit(main())
