"""Module entry point: python -m ditherlab."""

from .cli import main

main()
