import sys

from procmine.cli import main

sys.exit(main())
