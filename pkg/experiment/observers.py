# experiment\observers.py
"""
Run observers that belong to the experiment layer rather than to the numerics.
"""
import logging
from typing import List

from numerics.solver import RunObserver, SampleContext

from .export_handler import ExportHandler

logger = logging.getLogger(__name__)


class CheckpointObserver(RunObserver):
    """Writes every sampled state as a field CSV as soon as it is sampled."""

    name = 'checkpoint'

    def __init__(self, exporter: ExportHandler):
        self.exporter = exporter
        self.paths: List[str] = []
        self.failures = 0

    def start(self, context: SampleContext):
        self.paths = []
        self.failures = 0

    def sample(self, context: SampleContext):
        ok, result = self.exporter.export_checkpoint(context.state, len(self.paths) + self.failures)
        if ok:
            self.paths.append(result)
        else:
            self.failures += 1

    def finish(self, context: SampleContext):
        context.report.summary['checkpoints'] = len(self.paths)
        if self.failures:
            logger.warning(f"{self.failures} checkpoint(s) could not be written")
