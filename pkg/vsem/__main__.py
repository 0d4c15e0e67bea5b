import sys

from vsem.cli import main

sys.exit(main())
