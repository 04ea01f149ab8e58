import sys

from uavmission.cli import main

sys.exit(main())
