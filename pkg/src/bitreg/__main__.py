import sys

from bitreg.cli import main

sys.exit(main())
