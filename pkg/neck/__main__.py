import sys

from neck.main import main


sys.exit(main())
