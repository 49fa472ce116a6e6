import sys

from divfuzz.cli import main

sys.exit(main())
