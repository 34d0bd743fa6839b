"""Core exact arithmetic, poset model and grid engine"""
