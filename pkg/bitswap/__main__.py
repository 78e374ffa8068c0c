import sys

from bitswap.harness import main

sys.exit(main())
