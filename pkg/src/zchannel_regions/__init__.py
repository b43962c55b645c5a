"""zchannel-regions: rate regions and coding-scheme checks for the state-dependent Z channel."""

__version__ = "0.1.0"


def main() -> None:
    """CLI entrypoint for zchannel-regions."""
    import sys

    from zchannel_regions.cli import run

    sys.exit(run())
