"""Pydantic models for reports, systems and certificates"""
