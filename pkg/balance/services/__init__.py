"""Analyses built on the grid engine: T_n family, case systems, search"""
