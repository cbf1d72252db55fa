"""
Process entry for the flowsieve command line.
"""
import logging
import sys

from flowsieve.config import DEFAULT_LOG_LEVEL, LOG_FORMAT


def configure_logging(level: str = DEFAULT_LOG_LEVEL) -> None:
    """
    Send flowsieve logs to standard error.

    Standard output stays reserved for command results.
    """
    logging.basicConfig(
        level=logging.WARNING,
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
    )
    logging.getLogger("flowsieve").setLevel(level)


def run() -> None:
    from flowsieve.cli.main import main

    sys.exit(main())


if __name__ == "__main__":
    run()
