#!/usr/bin/env python3
"""
pd-fade-opt launcher
"""

if __name__ == "__main__":
    import sys

    from pdfade.main import main
    sys.exit(main())
