"""Measure a function-under-test by timing an external command."""

import logging
import shlex
import subprocess
import time
from typing import List

from src.errors import ConfigurationError, InvocationError

logger = logging.getLogger(__name__)

STDERR_TAIL = 2000


def invoke_external(command: str, batch: int, timeout: float = 60.0) -> List[float]:
    """Run `command` `batch` times in sequence and time each run.

    Args:
        command: Shell-style command line, split with shlex (no shell is spawned)
        batch: Number of sequential invocations
        timeout: Per-invocation limit in seconds

    Returns:
        Wall-clock latency of each invocation in milliseconds

    Raises:
        ConfigurationError: batch < 1 or an empty command
        InvocationError: spawn failure, timeout or non-zero exit; the batch is discarded
    """
    if batch < 1:
        raise ConfigurationError("batch", f"must be at least 1, got {batch}")
    argv = shlex.split(command)
    if not argv:
        raise ConfigurationError("exec", "empty command")

    latencies: List[float] = []
    for _ in range(batch):
        started = time.perf_counter()
        try:
            completed = subprocess.run(argv, capture_output=True, timeout=timeout, check=False)
        except subprocess.TimeoutExpired as exc:
            stderr = (exc.stderr or b"").decode("utf-8", "replace")[-STDERR_TAIL:]
            raise InvocationError(
                f"{command!r} timed out after {timeout}s", stderr=stderr, completed=len(latencies)
            ) from exc
        except OSError as exc:
            raise InvocationError(f"cannot spawn {argv[0]!r}: {exc}", completed=len(latencies)) from exc
        elapsed_ms = (time.perf_counter() - started) * 1000.0

        if completed.returncode != 0:
            stderr = completed.stderr.decode("utf-8", "replace")[-STDERR_TAIL:]
            raise InvocationError(
                f"{command!r} exited with status {completed.returncode}",
                returncode=completed.returncode,
                stderr=stderr,
                completed=len(latencies),
            )
        latencies.append(elapsed_ms)

    logger.debug("invoked %r %d times", command, batch)
    return latencies


class ExternalCommandSource:
    """Sample source that invokes a command once per requested sample."""

    def __init__(self, command: str, timeout: float = 60.0):
        self.command = command
        self.timeout = timeout

    def next_batch(self, size: int) -> List[float]:
        return invoke_external(self.command, size, self.timeout)
