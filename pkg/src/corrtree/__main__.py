from corrtree.cli import main
import sys

sys.exit(main())
