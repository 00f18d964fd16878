import sys

from cli import main as cli_main


def main():
    """Console entry point: the weakflow CLI."""
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
