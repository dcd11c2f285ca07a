"""
WLP ENGINE - COMMAND LINE ENTRY POINT
Usage: python main.py solve program.wlp --facts facts.tsv --semiring viterbi
"""

import sys

from wlp.cli import main

if __name__ == '__main__':
    sys.exit(main())
