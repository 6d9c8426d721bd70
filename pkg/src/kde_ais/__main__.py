import sys

from kde_ais.cli.main import main

sys.exit(main())
