from .config import PipelineConfig, load_config
from .estimate import EstimateResult, run_estimate
from .report import render_report
from .telemetry import push_telemetry

__all__ = ["PipelineConfig", "load_config", "EstimateResult", "run_estimate", "render_report",
           "push_telemetry"]
