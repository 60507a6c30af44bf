import os
import sys

# tests import the package as `neck.*` from the repository root
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
