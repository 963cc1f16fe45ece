import sys

from igfit.cli import main

sys.exit(main())
