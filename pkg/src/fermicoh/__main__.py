import sys

from fermicoh.cli import main

sys.exit(main())
