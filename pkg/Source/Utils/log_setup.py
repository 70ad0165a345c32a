import logging
from pathlib import Path
from typing import Optional

LOG_FORMAT = '%(asctime)s - %(message)s'


def setup_logging(results_path: Optional[Path] = None, verbose: bool = False) -> None:
    """Setup logging configuration

    Args:
        results_path: Directory receiving cmc.log. Console only when None.
        verbose: Log per-shift details (DEBUG) as well
    """
    handlers = [logging.StreamHandler()]
    if results_path is not None:
        results_path = Path(results_path)
        results_path.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(results_path / "cmc.log"))

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True
    )
