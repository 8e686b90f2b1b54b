"""CLI subcommands package."""
