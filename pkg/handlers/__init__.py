"""Handlers package for the DepSMUCE command line."""

from handlers.bench_handler import BenchHandler
from handlers.detect_handler import DetectHandler
from handlers.lrv_handler import LrvHandler
from handlers.quantile_handler import QuantileHandler
from handlers.simulate_handler import SimulateHandler

__all__ = [
    "BenchHandler",
    "DetectHandler",
    "LrvHandler",
    "QuantileHandler",
    "SimulateHandler",
]
