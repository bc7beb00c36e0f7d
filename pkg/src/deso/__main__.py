"""Module entrypoint for `python -m deso`."""

from deso.cli import run


if __name__ == "__main__":
    run()
