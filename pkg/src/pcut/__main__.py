import sys

from pcut.cli import main

sys.exit(main())
