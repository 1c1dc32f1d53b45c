"""Command-line front door"""
