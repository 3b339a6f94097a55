import sys

from smartchair.cli import main

sys.exit(main())
