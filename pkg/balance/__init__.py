"""Balance constants of width-2 posets - exact path-counting toolkit"""

__version__ = "1.0.0"
