"""``python -m mimo_capacity`` runs the CLI."""

from .cli_harness import entrypoint

entrypoint()
