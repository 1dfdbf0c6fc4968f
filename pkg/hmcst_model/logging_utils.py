import logging
from pathlib import Path


def get_logger(name: str) -> logging.Logger:
    """ Gets a logger for the given file, named relative to the working dir. """
    try:
        p = Path(name)
        if p.exists():
            name = str(p.absolute().relative_to(Path.cwd()).as_posix())
    except ValueError:
        pass
    return logging.getLogger(name)


def setup_logging(verbose: bool = False) -> None:
    """Configures the root handler for command-line runs.

    Library modules never call this; only `hmcst_model.cli` does.
    """
    level = logging.DEBUG if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(levelname)s:%(name)s: %(message)s",
    )
