import sys

from revdoor.cli import main

sys.exit(main())
