import sys

from hlsharp.cli import main

sys.exit(main())
