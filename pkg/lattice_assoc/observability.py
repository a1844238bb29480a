"""Observability: structured logging and metrics."""
import logging
import sys
from typing import Optional

import structlog
from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

from lattice_assoc.config import settings

logger = structlog.get_logger()


def setup_logging(level: Optional[str] = None):
    """Configure structured logging with structlog.

    Logs are written to stderr; stdout is reserved for CLI summaries.
    """
    level_name = (level or settings.log_level).upper()
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level_name),
    )

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer() if not settings.debug
            else structlog.dev.ConsoleRenderer()
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, level_name)
        ),
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )


class Metrics:
    """Prometheus metrics for statistic computation and inference."""

    def __init__(self, registry: Optional[CollectorRegistry] = None):
        self.registry = registry or CollectorRegistry()

        # Statistics
        self.statistics_total = Counter(
            'lattice_assoc_statistics_total',
            'Statistics computed',
            ['kind', 'variant'],
            registry=self.registry
        )

        self.errors_total = Counter(
            'lattice_assoc_errors_total',
            'Errors surfaced to callers',
            ['code'],
            registry=self.registry
        )

        # Weights
        self.weights_built_total = Counter(
            'lattice_assoc_weights_built_total',
            'Weight matrices built',
            ['method'],
            registry=self.registry
        )

        self.islands_total = Counter(
            'lattice_assoc_islands_total',
            'Sites without neighbours in built weight matrices',
            registry=self.registry
        )

        # Inference
        self.replicates_total = Counter(
            'lattice_assoc_replicates_total',
            'Permutation replicates evaluated',
            ['scope'],
            registry=self.registry
        )

        self.permutation_duration = Histogram(
            'lattice_assoc_permutation_duration_seconds',
            'Permutation inference duration',
            ['scope'],
            buckets=[0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 30.0],
            registry=self.registry
        )

        # Simulation
        self.sar_solve_duration = Histogram(
            'lattice_assoc_sar_solve_duration_seconds',
            'SAR linear solve duration',
            ['solver'],
            buckets=[0.001, 0.01, 0.1, 1.0, 10.0],
            registry=self.registry
        )

    def write(self, path: str):
        """Write the registry in the text exposition format."""
        write_to_textfile(path, self.registry)


def record(callback):
    """Run a metrics callback; metrics are best-effort and never raise."""
    if not settings.metrics_enabled:
        return
    try:
        callback(metrics)
    except Exception as e:
        logger.debug("Metric update failed", error=str(e), error_type=type(e).__name__)


# Global metrics instance
metrics = Metrics()
