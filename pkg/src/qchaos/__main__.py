import sys

from qchaos.cli import main

sys.exit(main())
