"""
Prometheus metrics for batch experiment runs.
Collected in a dedicated registry and written as a node-exporter textfile
when MRDIST_METRICS_FILE is set.
"""
from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, Info, write_to_textfile

from src.config import METRICS_FILE

REGISTRY = CollectorRegistry()

# --- Counters ---
PIPELINE_RUNS_TOTAL = Counter(
    "mrdist_pipeline_runs_total",
    "Pipeline runs by exit status",
    ["pipeline", "status"],
    registry=REGISTRY,
)

# --- Histograms ---
PIPELINE_DURATION = Histogram(
    "mrdist_pipeline_duration_seconds",
    "Wall time of a pipeline run in seconds",
    ["pipeline"],
    buckets=[0.1, 0.5, 1.0, 5.0, 15.0, 30.0, 60.0, 120.0, 300.0],
    registry=REGISTRY,
)

# --- Gauges ---
LAST_VERDICT = Gauge(
    "mrdist_last_verdict",
    "Verdict of the latest run (1=pass, 0=fail)",
    ["pipeline"],
    registry=REGISTRY,
)

# --- Info ---
RUN_INFO = Info(
    "mrdist_run",
    "Experiment of the latest run",
    registry=REGISTRY,
)


def record_run(pipeline, name, status, passed, seconds, path=METRICS_FILE):
    """Update the collectors for one run and flush them to `path` if configured."""
    PIPELINE_RUNS_TOTAL.labels(pipeline=pipeline, status=status).inc()
    PIPELINE_DURATION.labels(pipeline=pipeline).observe(seconds)
    LAST_VERDICT.labels(pipeline=pipeline).set(1 if passed else 0)
    RUN_INFO.info({"pipeline": pipeline, "name": name, "status": status})
    if path:
        write_to_textfile(path, REGISTRY)
