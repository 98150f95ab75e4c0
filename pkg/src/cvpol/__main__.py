import sys

from cvpol.cli import main

sys.exit(main())
