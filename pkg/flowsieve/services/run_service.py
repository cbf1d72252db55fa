"""
Service layer for browsing finished pipeline runs.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from flowsieve.config import ARTIFACT_NAMES
from flowsieve.services.artifact_service import ArtifactStore

logger = logging.getLogger(__name__)


class RunService:
    """
    Service for reading the artifacts of pipeline runs.

    Parsed runs are cached per directory and reloaded when any of their
    artifact files changed on disk, so a dashboard pointed at a directory that
    a pipeline is still writing picks up each new stage.
    """

    def __init__(self):
        self._runs: Dict[Path, Tuple[Tuple, Dict[str, Any]]] = {}
        logger.debug("Initializing RunService")

    @staticmethod
    def _stamp(directory: Path) -> Tuple:
        stamp = []
        for filename in ARTIFACT_NAMES.values():
            path = directory / filename
            if path.exists():
                stat = path.stat()
                stamp.append((filename, stat.st_mtime_ns, stat.st_size))
        return tuple(stamp)

    def load(self, directory: Path) -> Dict[str, Any]:
        """
        Parsed artifacts of a run directory.

        Args:
            directory: Run output directory

        Returns:
            Dict[str, Any]: Artifact name -> parsed artifact; empty when the
            directory does not exist or holds no artifacts
        """
        directory = Path(directory)
        if not directory.is_dir():
            logger.info(f"Run directory {directory} does not exist")
            return {}
        stamp = self._stamp(directory)
        cached = self._runs.get(directory)
        if cached is not None and cached[0] == stamp:
            return cached[1]
        run = ArtifactStore(directory).load_run()
        logger.info(f"Loaded {len(run)} artifacts from {directory}")
        self._runs[directory] = (stamp, run)
        return run

    def forget(self, directory: Optional[Path] = None) -> None:
        """Drop the cached copy of one run directory, or of all of them."""
        if directory is None:
            self._runs.clear()
        else:
            self._runs.pop(Path(directory), None)

    def config_hash(self, directory: Path) -> Optional[str]:
        """Config hash of a run, from its metadata; None for an empty or foreign directory."""
        metadata = self.load(directory).get("metadata")
        return None if metadata is None else metadata.get("config_hash")
