import sys

from weakgrad.main import main

sys.exit(main())
