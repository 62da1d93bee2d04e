import sys

from epsiplan.cli import main

sys.exit(main())
