import sys

from ch_vorticity.cli import main

sys.exit(main())
