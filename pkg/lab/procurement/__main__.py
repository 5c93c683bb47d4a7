import sys

from lab.procurement.cli import main

sys.exit(main())
