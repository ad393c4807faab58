import sys
from typing import List, Optional

import structlog
import typer

from ..errors import SLGreenError
from ..metrics import errors
from .commands import app

logger = structlog.get_logger()

# typer re-exports click's error types whether click is a dependency or vendored
UsageError = next(cls for cls in typer.BadParameter.__mro__ if cls.__name__ == "UsageError")


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit status: 0 ok, 1 usage, 2 invalid config, 3 numerical failure."""
    try:
        status = app(args=argv, standalone_mode=False, prog_name="slgreen")
    except UsageError as e:
        e.show()
        return 1
    except typer.Abort:
        return 1
    except SLGreenError as e:
        errors.labels(stage="cli").inc()
        logger.error("Command failed", error=e.message, exit_code=e.exit_code)
        sys.stderr.write(f"slgreen: {e.message}\n")
        return e.exit_code
    return status if isinstance(status, int) else 0


def run():
    sys.exit(main(sys.argv[1:]))


__all__ = ["app", "main", "run"]
